#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lerkit/random.hpp"

namespace lerkit::trials {

inline constexpr std::size_t kDefaultStepCap = 100'000;

/// Per-trial outcome streams for the spoofed regime: each encountered
/// entity is honest (v = 1, its coordinates disagree with the spoofed
/// position) with probability 1 - p. Trial j draws from src.derive(j);
/// bits are generated on demand and kept, so every consumer sees the same
/// streams.
class SpoofedStreams {
 public:
  SpoofedStreams(double p, std::size_t trials, const RandomSource& src);

  std::size_t trials() const noexcept { return rngs_.size(); }
  double p() const noexcept { return p_; }

  /// v at 1-based step `step` of `trial`. Not thread-safe for one trial;
  /// distinct trials may be read concurrently.
  bool bit(std::size_t trial, std::size_t step);

 private:
  void extend(std::size_t trial);

  double p_;
  std::vector<RandomSource> rngs_;
  std::vector<std::vector<std::uint64_t>> words_;
};

struct StepTotals {
  std::uint64_t sum = 0;
  double sum_sq = 0.0;
  std::size_t capped = 0;
};

/// First-passage steps of every spoofed trial under one weight function,
/// as a function of the threshold. Each trial keeps its running-maximum
/// records, so re-evaluating at a new threshold is a binary search unless
/// the trial has to be simulated further.
class DetectionProfile {
 public:
  DetectionProfile(SpoofedStreams& streams, std::size_t step_cap = kDefaultStepCap);

  /// Clears all cached records and installs new weights (size <= 64).
  void reset(std::span<const double> weights);

  /// Totals over all trials at threshold `t`. Returns nullopt as soon as
  /// the step sum is known to exceed `budget`; the decision is exact and
  /// independent of the worker count.
  std::optional<StepTotals> totals(double t, std::uint64_t budget = UINT64_MAX);

  std::size_t step_cap() const noexcept { return step_cap_; }

 private:
  struct Record {
    std::uint32_t step;
    double max_d;
  };
  struct Cursor {
    std::uint64_t mask = 0;
    std::uint32_t step = 0;
    double max_d = 0.0;
  };

  /// Steps for one trial, extending it if needed but never beyond `limit`.
  std::uint32_t first_passage(std::size_t trial, double t, std::uint64_t limit);

  SpoofedStreams* streams_;
  std::size_t step_cap_;
  std::vector<double> weights_;
  std::uint64_t full_mask_ = 0;
  std::vector<Cursor> cursors_;
  std::vector<std::vector<Record>> records_;
};

/// Full windows for the unspoofed regime: each of the T entries is
/// malicious (v = 1) with probability p. Trial j draws from src.derive(j).
class UnspoofedWindows {
 public:
  UnspoofedWindows(double p, std::size_t window, std::size_t trials, const RandomSource& src);

  std::size_t trials() const noexcept { return masks_.size(); }
  std::size_t window() const noexcept { return window_; }
  std::span<const std::uint64_t> masks() const noexcept { return masks_; }

  /// Number of windows with D <= t.
  std::size_t count_at_or_below(std::span<const double> weights, double t) const;

 private:
  std::size_t window_;
  std::vector<std::uint64_t> masks_;
};

}  // namespace lerkit::trials
