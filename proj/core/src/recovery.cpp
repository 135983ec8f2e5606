#include "lerkit/recovery.hpp"

#include "lerkit/error.hpp"

namespace lerkit::recovery {

SlidingWindow::SlidingWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidParam("T", "window capacity must be >= 1");
}

void SlidingWindow::push(VerificationOutcome outcome) {
  entries_.push_front(std::move(outcome));
  if (entries_.size() > capacity_) entries_.pop_back();
}

std::uint64_t SlidingWindow::mask() const {
  if (capacity_ > kMaxWindow) throw InvalidParam("T", "mask needs capacity <= 64");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].v != 0) bits |= std::uint64_t{1} << i;
  }
  return bits;
}

SlidingWindow push(SlidingWindow window, VerificationOutcome outcome) {
  window.push(std::move(outcome));
  return window;
}

double score(const SlidingWindow& window, const WeightFunction& weights) {
  if (weights.size() != window.capacity()) {
    throw CapacityMismatch(window.capacity(), weights.size());
  }
  const auto w = weights.values();
  double d = 0.0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (window.entries()[i].v != 0) d += w[i];
  }
  return d;
}

void ModeState::reset() {
  mode = Mode::Normal;
  entered_at.reset();
}

void step_in_place(ModeState& state, SlidingWindow& window, const VerificationOutcome& outcome,
                   const RecoveryConfig& config) {
  window.push(outcome);
  const double d = score(window, config.weights);
  if (state.mode == Mode::Normal && decide(d, config.threshold) == Mode::Recovery) {
    state.mode = Mode::Recovery;
    state.entered_at = outcome.at_time;
  }
  state.score_history.push_back({outcome.at_time, d, state.mode});
}

StepResult step(ModeState state, SlidingWindow window, const VerificationOutcome& outcome,
                const RecoveryConfig& config) {
  step_in_place(state, window, outcome, config);
  return {std::move(state), std::move(window)};
}

void write_score_history(std::ostream& out, const ModeState& state) {
  out << "step,D,mode\n";
  std::size_t n = 0;
  for (const auto& point : state.score_history) {
    out << ++n << ',' << point.d << ',' << to_string(point.mode) << '\n';
  }
}

const char* to_string(Mode mode) noexcept {
  return mode == Mode::Recovery ? "Recovery" : "Normal";
}

}  // namespace lerkit::recovery
