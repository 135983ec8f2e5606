#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lerkit/model.hpp"
#include "lerkit/random.hpp"

namespace lerkit::evaluate {

/// P(detected by step s) for s = 1..S under a fixed config.
struct DetectionCurve {
  std::vector<double> cumulative;
  double actual_p = 0.0;
  std::size_t trials = 0;
  ScenarioParams provenance;

  std::size_t max_steps() const noexcept { return cumulative.size(); }
  /// Probability of detection within `step` steps (1-based).
  double at(std::size_t step) const { return cumulative.at(step - 1); }
};

/// Fraction of N spoofed trials (entities malicious with probability
/// actual_p) that entered recovery mode by each step up to max_steps.
/// Uses the same per-trial streams as meta::estimate_detection_steps.
DetectionCurve detection_curve(const RecoveryConfig& config, double actual_p, std::size_t trials,
                               std::size_t max_steps, const RandomSource& src);

struct QualPoint {
  double x = 0.0;
  double qual = 0.0;
  double std_error = 0.0;
};

struct QualCurve {
  /// "p" or "E".
  std::string variable;
  std::vector<QualPoint> points;
};

/// qual of a fixed config evaluated at each actual p. All points share
/// one set of uniforms, so a window that fires at some p also fires at
/// every larger p and the curve is non-increasing by construction.
QualCurve qual_sweep_over_p(const RecoveryConfig& config, std::span<const double> p_values,
                            std::size_t trials, const RandomSource& src);

/// qual of each config at its own optimization p, keyed by its E.
QualCurve qual_sweep_over_e(std::span<const RecoveryConfig> configs, std::size_t trials,
                            const RandomSource& src);

struct ExactOptions {
  /// Largest window the 2^T state space is allowed to cover.
  std::size_t max_window = 20;
  std::size_t step_cap = 100'000;
  /// Iteration stops once the undetected mass falls below this.
  double mass_floor = 1e-15;
};

struct ExactSteps {
  double value = 0.0;
  /// Probability mass still undetected when iteration stopped.
  double tail_mass = 0.0;
  /// value + truncation_bound bounds the true expectation from above.
  double truncation_bound = 0.0;
  std::size_t iterations = 0;
};

/// Expected first step with D > t by dynamic programming over all window
/// contents (empty slots are zeros). From any state the all-ones window is
/// at most T steps away with probability >= (1-p)^T, so the omitted tail is
/// at most tail_mass * T / (1-p)^T. Throws BudgetExceeded when T exceeds
/// max_window and Nonterminating when t >= sum of weights.
ExactSteps exact_expected_steps_detail(const WeightFunction& weights, double t, double p,
                                       const ExactOptions& options = {});

double exact_expected_steps(const WeightFunction& weights, double t, double p,
                            const ExactOptions& options = {});

/// Sum of Bernoulli(p) window probabilities over all 2^T windows with D <= t.
double exact_qual(const WeightFunction& weights, double t, double p,
                  const ExactOptions& options = {});

/// CSV `step,prob`.
void write_curve_csv(std::ostream& out, const DetectionCurve& curve);
/// CSV `p,qual` or `E,qual`.
void write_sweep_csv(std::ostream& out, const QualCurve& curve);

/// `<metric>_<p>_<E>_<T>.csv`.
std::string artifact_name(const std::string& metric, double p, double e, std::size_t window);

}  // namespace lerkit::evaluate
