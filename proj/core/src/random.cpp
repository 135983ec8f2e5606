#include "lerkit/random.hpp"

#include <bit>

namespace lerkit {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t mix_stream(std::uint64_t stream, std::uint64_t index) noexcept {
  std::uint64_t s = stream * 0xd1342543de82ef95ULL + index;
  return splitmix64(s) ^ (index * 0x9e3779b97f4a7c15ULL);
}

}  // namespace

RandomSource::RandomSource(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  std::uint64_t sm = master_seed ^ std::rotl(stream_id * 0xff51afd7ed558ccdULL, 17);
  sm ^= stream_id;
  for (auto& word : state_) word = splitmix64(sm);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

RandomSource RandomSource::derive(std::uint64_t index) const {
  return RandomSource(master_seed_, mix_stream(stream_id_, index));
}

RandomSource::result_type RandomSource::operator()() noexcept {
  const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = std::rotl(state_[3], 45);
  return result;
}

}  // namespace lerkit
