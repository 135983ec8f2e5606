#pragma once

#include <cstddef>
#include <functional>

namespace lerkit {

/// Number of worker threads used by Monte Carlo loops. Defaults to the
/// LERKIT_WORKERS environment variable, else 1.
std::size_t workers();
void set_workers(std::size_t count);

/// Fixed trial partition used by every parallel loop. Chunk boundaries
/// depend only on `count`, so per-chunk partial results merged in chunk
/// order are identical for any worker count.
inline constexpr std::size_t kChunkSize = 2048;

inline std::size_t chunk_count(std::size_t count) {
  return (count + kChunkSize - 1) / kChunkSize;
}

/// Runs body(chunk, begin, end) for every chunk of [0, count).
void for_each_chunk(std::size_t count,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

}  // namespace lerkit
