#include "lerkit/evaluate.hpp"

#include <cmath>

#include "lerkit/error.hpp"
#include "lerkit/parallel.hpp"
#include "lerkit/recovery.hpp"
#include "lerkit/trials.hpp"

namespace lerkit::evaluate {

namespace {

std::uint64_t full_mask(std::size_t window) {
  return window == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << window) - 1;
}

void check_exact_window(const WeightFunction& weights, const ExactOptions& options) {
  if (weights.size() == 0) throw InvalidParam("weights", "must not be empty");
  if (weights.size() > options.max_window || weights.size() > 30) {
    throw BudgetExceeded("exact evaluation over 2^" + std::to_string(weights.size()) +
                         " windows exceeds the configured budget");
  }
}

}  // namespace

DetectionCurve detection_curve(const RecoveryConfig& config, double actual_p, std::size_t trials,
                               std::size_t max_steps, const RandomSource& src) {
  if (!(actual_p >= 0.0 && actual_p <= 1.0)) throw InvalidParam("p", "must lie in [0, 1]");
  if (trials == 0) throw InvalidParam("N", "must be >= 1");
  if (config.window() == 0 || config.window() > kMaxWindow) {
    throw InvalidParam("T", "trial engine needs 1 <= T <= 64");
  }
  trials::SpoofedStreams streams(actual_p, trials, src);
  const auto weights = config.weights.values();
  const std::uint64_t mask_all = full_mask(weights.size());

  std::vector<std::vector<std::size_t>> partial(chunk_count(trials));
  for_each_chunk(trials, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    auto& hist = partial[chunk];
    hist.assign(max_steps + 1, 0);
    for (std::size_t j = begin; j < end; ++j) {
      std::uint64_t mask = 0;
      for (std::size_t s = 1; s <= max_steps; ++s) {
        mask = ((mask << 1) | (streams.bit(j, s) ? 1U : 0U)) & mask_all;
        if (recovery::score_mask(mask, weights) > config.threshold) {
          ++hist[s];
          break;
        }
      }
    }
  });

  DetectionCurve curve;
  curve.actual_p = actual_p;
  curve.trials = trials;
  curve.provenance = config.provenance;
  curve.cumulative.resize(max_steps);
  std::size_t detected = 0;
  for (std::size_t s = 1; s <= max_steps; ++s) {
    for (const auto& hist : partial) detected += hist[s];
    curve.cumulative[s - 1] = static_cast<double>(detected) / static_cast<double>(trials);
  }
  return curve;
}

QualCurve qual_sweep_over_p(const RecoveryConfig& config, std::span<const double> p_values,
                            std::size_t trials, const RandomSource& src) {
  if (trials == 0) throw InvalidParam("N", "must be >= 1");
  QualCurve curve;
  curve.variable = "p";
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidParam("p", "must lie in [0, 1]");
    const trials::UnspoofedWindows windows(p, config.window(), trials, src);
    const double q = static_cast<double>(windows.count_at_or_below(config.weights.values(),
                                                                   config.threshold)) /
                     static_cast<double>(trials);
    curve.points.push_back({p, q, std::sqrt(q * (1.0 - q) / static_cast<double>(trials))});
  }
  return curve;
}

QualCurve qual_sweep_over_e(std::span<const RecoveryConfig> configs, std::size_t trials,
                            const RandomSource& src) {
  if (trials == 0) throw InvalidParam("N", "must be >= 1");
  QualCurve curve;
  curve.variable = "E";
  for (const auto& config : configs) {
    const trials::UnspoofedWindows windows(config.provenance.p, config.window(), trials, src);
    const double q = static_cast<double>(windows.count_at_or_below(config.weights.values(),
                                                                   config.threshold)) /
                     static_cast<double>(trials);
    curve.points.push_back(
        {config.provenance.E, q, std::sqrt(q * (1.0 - q) / static_cast<double>(trials))});
  }
  return curve;
}

ExactSteps exact_expected_steps_detail(const WeightFunction& weights, double t, double p,
                                       const ExactOptions& options) {
  check_exact_window(weights, options);
  if (!(p >= 0.0 && p < 1.0)) throw InvalidParam("p", "must satisfy 0 <= p < 1");
  if (!(t >= 0.0)) throw InvalidParam("t", "threshold must be >= 0");
  if (t >= weights.total()) {
    throw Nonterminating("threshold is at or above the weight total; D can never exceed it");
  }
  const std::size_t states = std::size_t{1} << weights.size();
  const std::uint64_t mask_all = full_mask(weights.size());
  std::vector<char> alive(states);
  for (std::size_t s = 0; s < states; ++s) {
    alive[s] = recovery::score_mask(s, weights.values()) <= t;
  }

  // prob[s]: probability of holding window s without having been detected.
  std::vector<double> prob(states, 0.0);
  std::vector<double> next(states, 0.0);
  prob[0] = 1.0;
  ExactSteps result;
  double mass = 1.0;
  for (; result.iterations < options.step_cap; ++result.iterations) {
    if (mass < options.mass_floor) break;
    result.value += mass;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < states; ++s) {
      if (prob[s] == 0.0) continue;
      const std::size_t shifted = (s << 1) & mask_all;
      next[shifted] += prob[s] * p;
      next[shifted | 1] += prob[s] * (1.0 - p);
    }
    mass = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
      if (!alive[s]) next[s] = 0.0;
      mass += next[s];
    }
    prob.swap(next);
  }
  result.tail_mass = mass;
  const double reach = std::pow(1.0 - p, static_cast<double>(weights.size()));
  result.truncation_bound = mass * static_cast<double>(weights.size()) / reach;
  return result;
}

double exact_expected_steps(const WeightFunction& weights, double t, double p,
                            const ExactOptions& options) {
  return exact_expected_steps_detail(weights, t, p, options).value;
}

double exact_qual(const WeightFunction& weights, double t, double p,
                  const ExactOptions& options) {
  check_exact_window(weights, options);
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParam("p", "must lie in [0, 1]");
  const std::size_t window = weights.size();
  std::vector<double> by_ones(window + 1);
  for (std::size_t k = 0; k <= window; ++k) {
    by_ones[k] = std::pow(p, static_cast<double>(k)) *
                 std::pow(1.0 - p, static_cast<double>(window - k));
  }
  const std::size_t states = std::size_t{1} << window;
  double total = 0.0;
  for (std::size_t s = 0; s < states; ++s) {
    if (recovery::score_mask(s, weights.values()) <= t) {
      total += by_ones[static_cast<std::size_t>(std::popcount(s))];
    }
  }
  return total;
}

void write_curve_csv(std::ostream& out, const DetectionCurve& curve) {
  out << "step,prob\n";
  for (std::size_t s = 1; s <= curve.max_steps(); ++s) {
    out << s << ',' << format_number(curve.at(s)) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const QualCurve& curve) {
  out << curve.variable << ",qual\n";
  for (const auto& point : curve.points) {
    out << format_number(point.x) << ',' << format_number(point.qual) << '\n';
  }
}

std::string artifact_name(const std::string& metric, double p, double e, std::size_t window) {
  return metric + "_" + format_number(p) + "_" + format_number(e) + "_" + std::to_string(window) +
         ".csv";
}

}  // namespace lerkit::evaluate
