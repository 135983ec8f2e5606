#pragma once

#include <cstdint>
#include <limits>

namespace lerkit {

/// Seeded, splittable random stream. Equal (master_seed, stream_id) pairs
/// produce identical sequences; derive() hands out independent child
/// streams so per-trial results do not depend on scheduling.
///
/// The generator is xoshiro256** seeded through splitmix64. Construction is
/// a handful of integer ops, which matters because Monte Carlo code creates
/// one child stream per trial.
class RandomSource {
 public:
  using result_type = std::uint64_t;

  explicit RandomSource(std::uint64_t master_seed = 0, std::uint64_t stream_id = 0);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Child stream for trial/worker `index`; depends only on
  /// (master_seed, stream_id, index), never on how much of this stream
  /// has been consumed.
  RandomSource derive(std::uint64_t index) const;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4];
};

/// Returns 1 with probability `prob`. prob <= 0 never fires, prob >= 1 always does.
inline bool bernoulli(RandomSource& src, double prob) noexcept { return src.uniform() < prob; }

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace lerkit
