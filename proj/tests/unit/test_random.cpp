#include <atomic>
#include <vector>

#include "doctest.h"
#include "lerkit/evaluate.hpp"
#include "lerkit/parallel.hpp"
#include "lerkit/random.hpp"

using namespace lerkit;

TEST_SUITE("random") {
  TEST_CASE("equal seeds give equal streams, different streams differ") {
    RandomSource a(7, 1);
    RandomSource b(7, 1);
    RandomSource c(7, 2);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a();
      CHECK(x == b());
      differs = differs || x != c();
    }
    CHECK(differs);
  }

  TEST_CASE("derived streams ignore how much of the parent was consumed") {
    RandomSource parent(11);
    const auto before = parent.derive(5)();
    for (int i = 0; i < 10; ++i) parent();
    CHECK(parent.derive(5)() == before);
    CHECK(parent.derive(6)() != before);
  }

  TEST_CASE("uniform draws stay in [0,1) and have mean near 1/2") {
    RandomSource src(3);
    double sum = 0.0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
      const double u = src.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
    // sd of the mean is sqrt(1/12/n) ~ 6.5e-4
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.004));
  }

  TEST_CASE("bernoulli edge probabilities") {
    RandomSource src(1);
    for (int i = 0; i < 1000; ++i) {
      CHECK_FALSE(bernoulli(src, 0.0));
      CHECK(bernoulli(src, 1.0));
    }
  }

  TEST_CASE("chunked loop visits every index exactly once") {
    for (std::size_t workers : {1U, 3U}) {
      set_workers(workers);
      for (std::size_t count : {0U, 1U, 2047U, 2048U, 10'001U}) {
        std::vector<std::atomic<int>> hits(count);
        for_each_chunk(count, [&](std::size_t, std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) hits[i]++;
        });
        for (auto& h : hits) REQUIRE(h.load() == 1);
      }
    }
    set_workers(1);
  }

  TEST_CASE("exceptions inside chunks reach the caller") {
    set_workers(2);
    CHECK_THROWS_AS(for_each_chunk(10'000,
                                   [](std::size_t chunk, std::size_t, std::size_t) {
                                     if (chunk == 2) throw std::runtime_error("boom");
                                   }),
                    std::runtime_error);
    set_workers(1);
  }

  TEST_CASE("curves are identical for one and many workers") {
    RecoveryConfig config;
    config.weights = WeightFunction({4, 3, 2, 2, 1, 1, 0.5, 0.25});
    config.threshold = 6.0;
    config.provenance = {0.3, 10.0, 8, 1000};
    set_workers(1);
    const auto one = evaluate::detection_curve(config, 0.3, 9000, 40, RandomSource(5));
    set_workers(4);
    const auto many = evaluate::detection_curve(config, 0.3, 9000, 40, RandomSource(5));
    set_workers(1);
    CHECK(one.cumulative == many.cumulative);
  }
}
