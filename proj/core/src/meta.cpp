#include "lerkit/meta.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "lerkit/error.hpp"

namespace lerkit::meta {

namespace {

void check_probability(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidParam("p", "must satisfy 0 <= p < 1");
}

void check_weights(const WeightFunction& weights) {
  if (weights.size() == 0 || weights.size() > kMaxWindow) {
    throw InvalidParam("T", "weight function must have 1..64 entries");
  }
}

}  // namespace

DetectionEstimate estimate_detection_steps(const WeightFunction& weights, double t, double p,
                                           std::size_t trials, const RandomSource& src,
                                           std::size_t step_cap) {
  check_probability(p);
  check_weights(weights);
  if (trials == 0) throw InvalidParam("N", "must be >= 1");
  if (!(t >= 0.0)) throw InvalidParam("t", "threshold must be >= 0");
  if (t >= weights.total()) {
    throw Nonterminating("threshold is at or above the weight total; D can never exceed it");
  }
  trials::SpoofedStreams streams(p, trials, src);
  trials::DetectionProfile profile(streams, step_cap);
  profile.reset(weights.values());
  const auto totals = *profile.totals(t);
  if (totals.capped * 100 > trials) {
    throw Nonterminating(std::to_string(totals.capped) + " of " + std::to_string(trials) +
                         " trials reached the step cap");
  }
  const double n = static_cast<double>(trials);
  DetectionEstimate est;
  est.mean = static_cast<double>(totals.sum) / n;
  est.capped = totals.capped;
  if (trials > 1) {
    const double var = std::max(0.0, (totals.sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

double expected_detection_steps(const WeightFunction& weights, double t, double p,
                                std::size_t trials, const RandomSource& src,
                                std::size_t step_cap) {
  return estimate_detection_steps(weights, t, p, trials, src, step_cap).mean;
}

double qual(const WeightFunction& weights, double t, double p, std::size_t window,
            std::size_t trials, const RandomSource& src) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParam("p", "must lie in [0, 1]");
  if (weights.size() != window) throw CapacityMismatch(window, weights.size());
  if (trials == 0) throw InvalidParam("N", "must be >= 1");
  trials::UnspoofedWindows windows(p, window, trials, src);
  return static_cast<double>(windows.count_at_or_below(weights.values(), t)) /
         static_cast<double>(trials);
}

ScenarioEvaluator::ScenarioEvaluator(const ScenarioParams& params,
                                     const RandomSource& spoofed_src,
                                     std::optional<RandomSource> unspoofed_src,
                                     ThresholdSearch search)
    : params_(validate_params(params)),
      search_(search),
      spoofed_(params.p, params.N, spoofed_src),
      profile_(spoofed_, search.step_cap) {
  if (unspoofed_src) unspoofed_.emplace(params.p, params.T, params.N, *unspoofed_src);
}

std::optional<double> ScenarioEvaluator::mean_or_above(double t, double total) {
  if (t >= total) return std::nullopt;
  const double n = static_cast<double>(params_.N);
  const auto budget = static_cast<std::uint64_t>(std::floor((params_.E + search_.tolerance) * n));
  const auto totals = profile_.totals(t, budget);
  if (!totals || totals->capped * 100 > params_.N) return std::nullopt;
  return static_cast<double>(totals->sum) / n;
}

double ScenarioEvaluator::optimal_threshold(const WeightFunction& weights,
                                            std::optional<double> start) {
  if (weights.size() != params_.T) throw CapacityMismatch(params_.T, weights.size());
  ++searches_;
  profile_.reset(weights.values());
  const double target = params_.E;
  const double tol = search_.tolerance;
  const double total = weights.total();
  auto within = [&](const std::optional<double>& m) {
    return m && std::abs(*m - target) <= tol;
  };

  const auto at_zero = mean_or_above(0.0, total);
  if (!at_zero) {
    throw Unachievable(target, "detection takes longer than E even at threshold 0");
  }
  if (within(at_zero)) return 0.0;

  const double t_max = std::nextafter(total, 0.0);
  const auto at_max = mean_or_above(t_max, total);
  if (at_max && *at_max < target - tol) {
    throw Unachievable(target, "no threshold below the weight total delays detection to E");
  }
  if (within(at_max)) return t_max;

  double t = std::clamp(start.value_or(total / 2.0), 0.0, t_max);
  double step = search_.initial_step;
  int last_dir = 0;
  double best_t = 0.0;
  double best_gap = std::abs(*at_zero - target);
  for (;;) {
    const auto m = mean_or_above(t, total);
    if (within(m)) return t;
    const double gap = m ? std::abs(*m - target) : std::numeric_limits<double>::infinity();
    if (gap < best_gap) {
      best_gap = gap;
      best_t = t;
    }
    const int dir = (!m || *m > target) ? -1 : +1;
    if (last_dir != 0 && dir != last_dir) step /= 2.0;
    if (step < search_.min_step) {
      if (search_.require_tolerance) {
        throw Unachievable(target, "no threshold brings the mean within tolerance of E");
      }
      return best_t;
    }
    last_dir = dir;
    t = std::clamp(t + dir * step, 0.0, t_max);
  }
}

double ScenarioEvaluator::qual(const WeightFunction& weights, double t) const {
  if (!unspoofed_) throw InvalidParam("unspoofed_src", "evaluator was built without windows");
  return static_cast<double>(unspoofed_->count_at_or_below(weights.values(), t)) /
         static_cast<double>(unspoofed_->trials());
}

double optimal_threshold(const WeightFunction& weights, double p, double E, std::size_t trials,
                         const RandomSource& src, ThresholdSearch search) {
  check_weights(weights);
  ScenarioParams params{p, E, weights.size(), trials};
  ScenarioEvaluator evaluator(params, src, std::nullopt, search);
  return evaluator.optimal_threshold(weights, search.start);
}

Interval shrink_interval(double low, double high, const QualProbe& probe, double resolution) {
  if (!(low <= high)) throw InvalidParam("interval", "low must not exceed high");
  std::map<double, double> cache;
  auto q = [&](double x) {
    auto [it, fresh] = cache.try_emplace(x, 0.0);
    if (fresh) it->second = probe(x);
    return it->second;
  };

  // Descend toward the better end until the midpoint is a local best.
  double lo = low;
  double hi = high;
  double mid = lo;
  for (;;) {
    if (hi - lo <= resolution) return {lo, hi};
    mid = lo + (hi - lo) / 2.0;
    const double q_mid = q(mid);
    if (q_mid < q(lo)) {
      hi = mid;
    } else if (q_mid < q(hi)) {
      lo = mid;
    } else {
      break;
    }
  }

  // Plateau phase: [lo, m1] and [m2, hi] are the flanks; qual is at its
  // best value `best` on [m1, m2].
  double m1 = mid;
  double m2 = mid;
  double best = q(mid);
  for (;;) {
    if (m1 - lo > resolution) {
      const double mn = lo + (m1 - lo) / 2.0;
      const double q_new = q(mn);
      if (q_new < best) {
        lo = mn;
      } else if (q_new > best) {
        hi = m1;
        m1 = m2 = mn;
        best = q_new;
      } else {
        m1 = mn;
      }
    } else if (hi - m2 > resolution) {
      const double mn = m2 + (hi - m2) / 2.0;
      const double q_new = q(mn);
      if (q_new < best) {
        hi = mn;
      } else if (q_new > best) {
        lo = m2;
        m1 = m2 = mn;
        best = q_new;
      } else {
        m2 = mn;
      }
    } else {
      break;
    }
  }
  const double lower = q(lo) < q(m1) ? m1 : lo;
  const double upper = q(hi) < q(m2) ? m2 : hi;
  return {lower, upper};
}

namespace {

QualProbe index_probe(ScenarioEvaluator& evaluator, const WeightFunction& base, std::size_t index,
                      double start, std::size_t& probes) {
  return [&evaluator, &base, index, start, &probes](double value) {
    ++probes;
    const WeightFunction candidate = base.with(index, value);
    try {
      const double t = evaluator.optimal_threshold(candidate, start);
      return evaluator.qual(candidate, t);
    } catch (const Unachievable&) {
      return 0.0;
    }
  };
}

}  // namespace

Interval optimize_index(const WeightFunction& weights, std::size_t index, double low, double high,
                        const ScenarioParams& params, const RandomSource& src) {
  validate_params(params);
  if (weights.size() != params.T) throw CapacityMismatch(params.T, weights.size());
  if (index < 1 || index > weights.size()) throw InvalidParam("index", "must lie in 1..T");
  if (!(low <= high)) throw InvalidParam("interval", "low must not exceed high");
  if (low == high) return {low, low};
  ScenarioEvaluator evaluator(params, src.derive(1), src.derive(2));
  const double start = evaluator.optimal_threshold(weights);
  std::size_t probes = 0;
  return shrink_interval(low, high, index_probe(evaluator, weights, index, start, probes));
}

WeightFunction fit_monotone(const IndexBounds& bounds) {
  if (bounds.lower.size() != bounds.upper.size() || bounds.lower.empty()) {
    throw InvalidParam("bounds", "lower and upper must be non-empty and equally long");
  }
  std::vector<double> fitted(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (bounds.lower[i] > bounds.upper[i]) {
      throw InvalidParam("bounds", "lower exceeds upper at index " + std::to_string(i + 1));
    }
    fitted[i] = i == 0 ? bounds.upper[0] : std::min(fitted[i - 1], bounds.upper[i]);
    if (fitted[i] < bounds.lower[i]) throw InfeasibleMonotoneFit(i + 1);
  }
  return WeightFunction(std::move(fitted));
}

namespace {

struct SweepResult {
  IndexBounds bounds;
  WeightFunction fitted;
  double threshold = 0.0;
  double qual = 0.0;
};

SweepResult run_sweep(ScenarioEvaluator& evaluator, const WeightFunction& start,
                      double start_threshold, std::size_t sweep_number,
                      const OptimizeOptions& options, std::size_t& probes) {
  const std::size_t window = start.size();
  const double high = 2.0 * start_threshold;
  SweepResult result;
  result.bounds.lower.resize(window);
  result.bounds.upper.resize(window);

  WeightFunction base = start;
  double base_threshold = start_threshold;
  for (std::size_t index = 1; index <= window; ++index) {
    double top = high;
    if (options.sweep == Sweep::Sequential && index > 1) top = std::min(high, base.at(index - 1));
    const Interval interval = shrink_interval(
        0.0, top, index_probe(evaluator, base, index, base_threshold, probes), options.resolution);
    result.bounds.lower[index - 1] = interval.lower;
    result.bounds.upper[index - 1] = interval.upper;
    if (options.on_index) options.on_index(sweep_number, index, interval);

    if (options.sweep == Sweep::Sequential) {
      const WeightFunction candidate = base.with(index, interval.upper);
      try {
        base_threshold = evaluator.optimal_threshold(candidate, base_threshold);
      } catch (const Unachievable&) {
        // Keep the upper bound anyway; the final threshold search decides.
      }
      base = candidate;
    }
  }

  result.fitted = fit_monotone(result.bounds);
  result.threshold = evaluator.optimal_threshold(result.fitted, start_threshold);
  result.qual = evaluator.qual(result.fitted, result.threshold);
  return result;
}

}  // namespace

OptimizationReport optimize_weights(const ScenarioParams& params, const RandomSource& src,
                                    const OptimizeOptions& options) {
  validate_params(params);
  ScenarioEvaluator evaluator(params, src.derive(1), src.derive(2), options.search);

  OptimizationReport report;
  report.trials_used = params.N;
  report.master_seed = src.master_seed();
  report.stream_id = src.stream_id();

  WeightFunction start = WeightFunction::uniform(params.T, 1.0);
  report.initial_threshold = evaluator.optimal_threshold(start, options.search.start);
  double start_threshold = report.initial_threshold;

  const std::size_t rounds = std::max<std::size_t>(1, options.rounds);
  for (std::size_t round = 1; round <= rounds; ++round) {
    SweepResult sweep;
    try {
      sweep = run_sweep(evaluator, start, start_threshold, round, options, report.probes);
    } catch (const Error&) {
      if (round == 1) throw;
      break;
    }
    if (round > 1 && sweep.qual <= report.qual) break;
    report.rounds_run = round;
    report.bounds = sweep.bounds;
    report.fitted_weights = sweep.fitted;
    report.threshold = sweep.threshold;
    report.qual = sweep.qual;
    start = std::move(sweep.fitted);
    start_threshold = sweep.threshold;
  }
  return report;
}

RecoveryConfig to_config(const OptimizationReport& report, const ScenarioParams& params) {
  RecoveryConfig config;
  config.weights = report.fitted_weights;
  config.threshold = report.threshold;
  config.provenance = params;
  config.qual = report.qual;
  return config;
}

void write_bounds_csv(std::ostream& out, const OptimizationReport& report) {
  out << "index,lower,upper,fitted\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < report.bounds.size(); ++i) {
    out << i + 1 << ',' << report.bounds.lower[i] << ',' << report.bounds.upper[i] << ','
        << report.fitted_weights.at(i + 1) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace lerkit::meta
