#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "lerkit/model.hpp"

namespace lerkit::recovery {

/// The T most recent verification outcomes, most recent first.
class SlidingWindow {
 public:
  explicit SlidingWindow(std::size_t capacity);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool full() const noexcept { return entries_.size() == capacity_; }

  /// 1-based; index 1 is the most recent outcome.
  const VerificationOutcome& at(std::size_t index) const { return entries_.at(index - 1); }
  const std::deque<VerificationOutcome>& entries() const noexcept { return entries_; }

  /// Outcomes packed as bits: bit i-1 holds v at index i. Capacity <= 64.
  std::uint64_t mask() const;

  void push(VerificationOutcome outcome);

 private:
  std::size_t capacity_;
  std::deque<VerificationOutcome> entries_;
};

/// Value-returning form: the new outcome lands at index 1 and the least
/// recent entry is evicted at capacity.
SlidingWindow push(SlidingWindow window, VerificationOutcome outcome);

/// D = sum over occupied indices of w_i * v_i. Unfilled indices count 0.
double score(const SlidingWindow& window, const WeightFunction& weights);

/// Same sum over a packed window; bits above weights.size() are ignored.
inline double score_mask(std::uint64_t mask, std::span<const double> weights) noexcept {
  if (weights.size() < 64) mask &= (std::uint64_t{1} << weights.size()) - 1;
  double d = 0.0;
  while (mask != 0) {
    d += weights[static_cast<std::size_t>(std::countr_zero(mask))];
    mask &= mask - 1;
  }
  return d;
}

enum class Mode { Normal, Recovery };

/// Recovery iff D > t.
constexpr Mode decide(double d, double threshold) noexcept {
  return d > threshold ? Mode::Recovery : Mode::Normal;
}

struct ScorePoint {
  double at_time = 0.0;
  double d = 0.0;
  Mode mode = Mode::Normal;
};

struct ModeState {
  Mode mode = Mode::Normal;
  std::optional<double> entered_at;
  std::vector<ScorePoint> score_history;

  /// Recovery is latched; this is the only way back to Normal.
  void reset();
};

struct StepResult {
  ModeState state;
  SlidingWindow window;
};

/// push + score + decide. Once in Recovery the state stays there.
StepResult step(ModeState state, SlidingWindow window, const VerificationOutcome& outcome,
                const RecoveryConfig& config);

/// In-place variant used by long-running simulations.
void step_in_place(ModeState& state, SlidingWindow& window, const VerificationOutcome& outcome,
                   const RecoveryConfig& config);

/// CSV `step,D,mode` with step counted from 1.
void write_score_history(std::ostream& out, const ModeState& state);

const char* to_string(Mode mode) noexcept;

}  // namespace lerkit::recovery
