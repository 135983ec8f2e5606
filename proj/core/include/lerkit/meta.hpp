#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "lerkit/model.hpp"
#include "lerkit/random.hpp"
#include "lerkit/trials.hpp"

namespace lerkit::meta {

struct DetectionEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t capped = 0;
};

/// Mean first step with D > t over N spoofed trials (v = 1 with
/// probability 1 - p). Trials that reach `step_cap` count with the cap;
/// throws Nonterminating if t >= sum of weights or more than 1% of trials
/// hit the cap.
DetectionEstimate estimate_detection_steps(const WeightFunction& weights, double t, double p,
                                           std::size_t trials, const RandomSource& src,
                                           std::size_t step_cap = trials::kDefaultStepCap);

double expected_detection_steps(const WeightFunction& weights, double t, double p,
                                std::size_t trials, const RandomSource& src,
                                std::size_t step_cap = trials::kDefaultStepCap);

struct ThresholdSearch {
  /// Accept once |mean - E| <= tolerance.
  double tolerance = 0.05;
  double initial_step = 1.0;
  /// Give up refining once the step falls below this.
  double min_step = 1e-4;
  /// Starting threshold; defaults to half the weight total.
  std::optional<double> start;
  std::size_t step_cap = trials::kDefaultStepCap;
  /// When set, a search that runs out of step size without meeting the
  /// tolerance throws Unachievable instead of returning the closest
  /// threshold.
  bool require_tolerance = false;
};

/// Fraction of N unspoofed windows (v = 1 with probability p) with D <= t.
double qual(const WeightFunction& weights, double t, double p, std::size_t window,
            std::size_t trials, const RandomSource& src);

/// Holds one fixed set of spoofed streams and unspoofed windows so every
/// threshold and qual evaluation against it uses common random numbers.
class ScenarioEvaluator {
 public:
  /// Without `unspoofed_src` only threshold searches are available.
  ScenarioEvaluator(const ScenarioParams& params, const RandomSource& spoofed_src,
                    std::optional<RandomSource> unspoofed_src, ThresholdSearch search = {});

  const ScenarioParams& params() const noexcept { return params_; }

  /// Threshold whose mean detection step is within tolerance of E.
  /// Steps down while the mean exceeds E and up while it falls short,
  /// halving the step whenever the direction flips. If the step drops
  /// below min_step first, the evaluated threshold closest to E wins.
  /// Throws Unachievable when t = 0 already detects too late, or when no
  /// threshold below the weight total delays detection to E.
  double optimal_threshold(const WeightFunction& weights, std::optional<double> start = {});

  double qual(const WeightFunction& weights, double t) const;

  /// Number of threshold searches performed so far.
  std::size_t searches() const noexcept { return searches_; }

 private:
  /// Mean at t, or nullopt when the mean certainly exceeds E + tolerance.
  std::optional<double> mean_or_above(double t, double total);

  ScenarioParams params_;
  ThresholdSearch search_;
  trials::SpoofedStreams spoofed_;
  trials::DetectionProfile profile_;
  std::optional<trials::UnspoofedWindows> unspoofed_;
  std::size_t searches_ = 0;
};

/// Free-function form: builds its own evaluator from `src`.
double optimal_threshold(const WeightFunction& weights, double p, double E, std::size_t trials,
                         const RandomSource& src, ThresholdSearch search = {});

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct IndexBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return lower.size(); }
};

/// Maps a candidate weight value to the qual it achieves.
using QualProbe = std::function<double(double)>;

/// Recursive interval shrinking over [low, high]. While qual at the
/// midpoint is beaten by an endpoint, recurse into that half; once the
/// midpoint is at least as good as both ends, shrink the two flanks of the
/// plateau around it until both are narrower than `resolution`, and
/// return the consecutive pair of boundary points with the highest qual.
Interval shrink_interval(double low, double high, const QualProbe& probe,
                         double resolution = 1e-5);

/// Weight interval for 1-based `index` of `weights`, each probe
/// re-optimizing the threshold. Probes where E is unachievable score 0.
Interval optimize_index(const WeightFunction& weights, std::size_t index, double low, double high,
                        const ScenarioParams& params, const RandomSource& src);

/// Greedy fit from index 1: w_1 = upper_1, w_i = min(w_{i-1}, upper_i).
/// Throws InfeasibleMonotoneFit where w_i drops below lower_i.
WeightFunction fit_monotone(const IndexBounds& bounds);

struct OptimizationReport {
  IndexBounds bounds;
  WeightFunction fitted_weights;
  double threshold = 0.0;
  double qual = 0.0;
  /// Threshold of the initial uniform weights; bounds searched in [0, 2x].
  double initial_threshold = 0.0;
  std::size_t trials_used = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  std::size_t probes = 0;
  std::size_t rounds_run = 0;
};

enum class Sweep {
  /// Every index is probed against the unmodified starting function and
  /// the monotone fit runs once over all bounds.
  Independent,
  /// Index i is probed with indices < i already set to their fitted
  /// values, over [0, min(high, w_{i-1})], so the fit is always feasible.
  Sequential,
};

struct OptimizeOptions {
  ThresholdSearch search;
  double resolution = 1e-5;
  Sweep sweep = Sweep::Sequential;
  /// Maximum number of sweeps. Each sweep after the first restarts from
  /// the previous fitted function with high = 2 * its threshold; the best
  /// sweep by qual is kept and the loop stops once qual stops improving.
  std::size_t rounds = 4;
  /// Called after each index finishes (sweep, 1-based index, interval).
  std::function<void(std::size_t, std::size_t, const Interval&)> on_index;
};

/// The full meta-protocol for (p, E, T, N).
OptimizationReport optimize_weights(const ScenarioParams& params, const RandomSource& src,
                                    const OptimizeOptions& options = {});

RecoveryConfig to_config(const OptimizationReport& report, const ScenarioParams& params);

/// CSV `index,lower,upper,fitted`.
void write_bounds_csv(std::ostream& out, const OptimizationReport& report);

}  // namespace lerkit::meta
