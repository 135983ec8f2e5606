#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lerkit {

/// Largest sliding window the bit-packed trial engines support.
inline constexpr std::size_t kMaxWindow = 64;

/// Signal propagation speed, m/s.
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// User-chosen scenario: assumed malicious fraction p, target expected
/// detection steps E, window size T and Monte Carlo repetitions N.
struct ScenarioParams {
  double p = 0.3;
  double E = 10.0;
  std::size_t T = 30;
  std::size_t N = 10'000;

  friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

/// Returns `params` unchanged or throws InvalidParam naming the first bad field.
ScenarioParams validate_params(const ScenarioParams& params);

/// Non-negative weights over window indices 1..T; index 1 is the most
/// recently encountered entity.
class WeightFunction {
 public:
  WeightFunction() = default;
  explicit WeightFunction(std::vector<double> weights);

  static WeightFunction uniform(std::size_t size, double value = 1.0);

  std::size_t size() const noexcept { return weights_.size(); }
  /// 1-based access, matching the window index convention.
  double at(std::size_t index) const { return weights_.at(index - 1); }
  std::span<const double> values() const noexcept { return weights_; }
  double total() const noexcept;
  bool is_non_increasing() const noexcept;

  /// Copy with the weight at 1-based `index` replaced.
  WeightFunction with(std::size_t index, double value) const;

  friend bool operator==(const WeightFunction&, const WeightFunction&) = default;

 private:
  std::vector<double> weights_;
};

/// Output of the meta-protocol and input to the recovery engine.
struct RecoveryConfig {
  WeightFunction weights;
  double threshold = 0.0;
  ScenarioParams provenance;
  double qual = 0.0;

  std::size_t window() const noexcept { return weights.size(); }

  friend bool operator==(const RecoveryConfig&, const RecoveryConfig&) = default;
};

/// Throws InvalidParam when the config breaks its invariants.
void validate_config(const RecoveryConfig& config);

/// JSON document `{ "T", "weights", "threshold", "p", "E", "N", "qual" }`.
std::string to_json(const RecoveryConfig& config);
RecoveryConfig config_from_json(const std::string& text);

void save_config(const RecoveryConfig& config, const std::string& path);
RecoveryConfig load_config(const std::string& path);

/// Planar position in meters.
struct Coordinates {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Coordinates&, const Coordinates&) = default;
};

inline double distance(const Coordinates& a, const Coordinates& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

inline bool is_finite(const Coordinates& c) {
  return std::isfinite(c.x) && std::isfinite(c.y) && std::isfinite(c.z);
}

/// One location-verification result; v == 1 means the peer's reported
/// coordinates disagree with the measured distance.
struct VerificationOutcome {
  std::string peer_id;
  std::uint8_t v = 0;
  double at_time = 0.0;

  friend bool operator==(const VerificationOutcome&, const VerificationOutcome&) = default;
};

/// Shortest decimal text that round-trips to `value` ("0.2", "10", "1e-05").
std::string format_number(double value);

}  // namespace lerkit
