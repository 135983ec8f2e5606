#include <cmath>
#include <sstream>

#include "doctest.h"
#include "lerkit/error.hpp"
#include "lerkit/meta.hpp"

using namespace lerkit;
using namespace lerkit::meta;

TEST_SUITE("meta") {
  TEST_CASE("unit weights at t=6.5 need seven honest disagreements") {
    // Negative binomial mean 7 / (1 - p); a 30-wide window is long enough
    // that the finite-window correction is far below the Monte Carlo error.
    const auto est =
        estimate_detection_steps(WeightFunction::uniform(30), 6.5, 0.3, 100'000, RandomSource(1));
    CHECK(std::abs(est.mean - 10.0) <= 0.1);
    CHECK(std::abs(est.mean - 10.0) <= 4.0 * est.std_error);
    CHECK(est.capped == 0);
  }

  TEST_CASE("threshold zero gives the geometric mean") {
    CHECK(expected_detection_steps(WeightFunction::uniform(5), 0.0, 0.0, 1000, RandomSource(2)) ==
          1.0);
    for (double p : {0.2, 0.4}) {
      const auto est =
          estimate_detection_steps(WeightFunction::uniform(5), 0.0, p, 100'000, RandomSource(3));
      const double expected = 1.0 / (1.0 - p);
      const double sd = std::sqrt(p) / (1.0 - p);
      CHECK(std::abs(est.mean - expected) <= 3.0 * sd / std::sqrt(100'000.0));
    }
  }

  TEST_CASE("a threshold at the weight total never terminates") {
    const WeightFunction w({2, 1, 1});
    CHECK_THROWS_AS(expected_detection_steps(w, 4.0, 0.3, 100, RandomSource(1)), Nonterminating);
    CHECK_THROWS_AS(expected_detection_steps(w, 9.0, 0.3, 100, RandomSource(1)), Nonterminating);
  }

  TEST_CASE("optimal threshold lands on the integer plateau") {
    const double t1 =
        optimal_threshold(WeightFunction::uniform(30), 0.3, 10.0, 100'000, RandomSource(4));
    CHECK(t1 >= 6.0);
    CHECK(t1 < 7.0);
    const double t2 =
        optimal_threshold(WeightFunction::uniform(10), 0.0, 5.0, 1000, RandomSource(4));
    CHECK(t2 >= 4.0);
    CHECK(t2 < 5.0);
  }

  TEST_CASE("unreachable targets are reported") {
    // Even t=0 needs 1/(1-p) = 2 steps on average.
    CHECK_THROWS_AS(optimal_threshold(WeightFunction::uniform(5), 0.5, 1.0, 2000, RandomSource(5)),
                    Unachievable);
    // A 3-wide window with p=0 detects by step 3 at the latest.
    CHECK_THROWS_AS(optimal_threshold(WeightFunction::uniform(3), 0.0, 20.0, 100, RandomSource(5)),
                    Unachievable);
  }

  TEST_CASE("qual edge cases") {
    const WeightFunction w({3, 2, 2, 1, 1, 1, 0.5, 0.5, 0.25, 0.25});
    CHECK(qual(w, w.total(), 0.3, 10, 5000, RandomSource(1)) == 1.0);
    CHECK(qual(w, 100.0, 0.3, 10, 5000, RandomSource(1)) == 1.0);
    CHECK(qual(w, 3.0, 0.0, 10, 5000, RandomSource(1)) == 1.0);

    const std::size_t n = 200'000;
    const double expected = std::pow(0.7, 10);
    const double got = qual(w, 0.0, 0.3, 10, n, RandomSource(6));
    CHECK(std::abs(got - expected) <= 3.0 * std::sqrt(expected * (1 - expected) / n));
  }

  TEST_CASE("shrink_interval: degenerate interval") {
    int calls = 0;
    const auto iv = shrink_interval(2.0, 2.0, [&](double) { return ++calls, 1.0; });
    CHECK(iv.lower == 2.0);
    CHECK(iv.upper == 2.0);
    CHECK_THROWS_AS(shrink_interval(3.0, 2.0, [](double) { return 0.0; }), InvalidParam);
  }

  TEST_CASE("shrink_interval: planted unimodal landscape") {
    for (double peak : {0.3, 3.7, 6.3, 9.9}) {
      const auto iv = shrink_interval(0.0, 10.0, [peak](double x) { return -(x - peak) * (x - peak); },
                                      1e-5);
      CHECK(iv.lower <= peak + 1e-5);
      CHECK(iv.upper >= peak - 1e-5);
      CHECK(iv.upper - iv.lower <= 2e-5);
    }
  }

  TEST_CASE("shrink_interval: flat plateau matches a grid scan") {
    // Integer-valued score with w = 1 gives a step landscape; this one is
    // best on [2, 5].
    auto probe = [](double x) { return (x >= 2.0 && x <= 5.0) ? 1.0 : (x < 2.0 ? 0.5 : 0.25); };
    const auto iv = shrink_interval(0.0, 10.0, probe, 1e-5);
    CHECK(probe(iv.lower) == probe(iv.upper));
    double grid_lo = 10.0;
    double grid_hi = 0.0;
    for (int i = 0; i <= 10'000; ++i) {
      const double x = i * 1e-3;
      if (probe(x) == 1.0) {
        grid_lo = std::min(grid_lo, x);
        grid_hi = std::max(grid_hi, x);
      }
    }
    CHECK(std::abs(iv.lower - grid_lo) <= 1e-3);
    CHECK(std::abs(iv.upper - grid_hi) <= 1e-3);

    const auto flat = shrink_interval(1.0, 4.0, [](double) { return 0.7; });
    CHECK(flat.lower == 1.0);
    CHECK(flat.upper == 4.0);
  }

  TEST_CASE("fit_monotone") {
    CHECK(fit_monotone({{2, 2, 2}, {2, 2, 2}}) == WeightFunction({2, 2, 2}));
    CHECK(fit_monotone({{0, 0, 0}, {5, 4, 6}}) == WeightFunction({5, 4, 4}));
    try {
      fit_monotone({{1, 3, 0}, {2, 9, 9}});
      FAIL("expected InfeasibleMonotoneFit");
    } catch (const InfeasibleMonotoneFit& e) {
      CHECK(e.index() == 2);
    }
    CHECK_THROWS_AS(fit_monotone({{}, {}}), InvalidParam);
  }

  TEST_CASE("optimize with no malicious entities keeps full qual") {
    const ScenarioParams params{0.0, 5.0, 10, 1000};
    OptimizeOptions options;
    options.rounds = 1;
    const auto report = optimize_weights(params, RandomSource(7), options);
    CHECK(report.qual == 1.0);
    CHECK(report.fitted_weights.size() == 10);
    CHECK(report.fitted_weights.is_non_increasing());
    const auto config = to_config(report, params);
    CHECK_NOTHROW(validate_config(config));
    CHECK(config.qual == 1.0);

    std::ostringstream csv;
    write_bounds_csv(csv, report);
    CHECK(csv.str().rfind("index,lower,upper,fitted\n1,", 0) == 0);
  }

  TEST_CASE("optimize is reproducible and improves on uniform weights") {
    const ScenarioParams params{0.3, 5.0, 8, 4000};
    OptimizeOptions options;
    options.rounds = 2;
    const auto a = optimize_weights(params, RandomSource(11), options);
    const auto b = optimize_weights(params, RandomSource(11), options);
    CHECK(a.fitted_weights == b.fitted_weights);
    CHECK(a.threshold == b.threshold);
    CHECK(a.fitted_weights.is_non_increasing());

    ScenarioEvaluator eval(params, RandomSource(11).derive(1), RandomSource(11).derive(2));
    const auto uniform = WeightFunction::uniform(8);
    const double uniform_qual = eval.qual(uniform, eval.optimal_threshold(uniform));
    CHECK(a.qual >= uniform_qual);
  }
}
