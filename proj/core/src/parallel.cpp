#include "lerkit/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lerkit {

namespace {

std::size_t workers_from_env() {
  if (const char* env = std::getenv("LERKIT_WORKERS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::atomic<std::size_t>& worker_setting() {
  static std::atomic<std::size_t> value{workers_from_env()};
  return value;
}

}  // namespace

std::size_t workers() { return worker_setting().load(); }

void set_workers(std::size_t count) { worker_setting().store(std::max<std::size_t>(1, count)); }

void for_each_chunk(std::size_t count,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t chunks = chunk_count(count);
  const std::size_t threads = std::min(workers(), chunks);
  auto run = [&](std::size_t chunk) {
    const std::size_t begin = chunk * kChunkSize;
    body(chunk, begin, std::min(count, begin + kChunkSize));
  };
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        try {
          run(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = chunks;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace lerkit
