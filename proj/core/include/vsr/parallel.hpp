#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vsr {

/// Calls body(begin, end, chunk) over `count` items split into contiguous
/// chunks. The chunk layout depends only on `count` and `workers`; callers
/// that need worker-independent results must reduce order-independently.
template <class Body>
void parallel_chunks(std::size_t count, unsigned workers, Body&& body) {
  if (count == 0) return;
  workers = std::max(1u, workers);
  const std::size_t chunks = std::min<std::size_t>(workers, count);
  if (chunks == 1) {
    body(std::size_t{0}, count, std::size_t{0});
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = count * c / chunks;
    const std::size_t end = count * (c + 1) / chunks;
    threads.emplace_back([&, begin, end, c] {
      try {
        body(begin, end, c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

/// out[i] = fn(i) for i in [0, count), evaluated on `workers` threads.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned workers, Fn&& fn) {
  std::vector<T> out(count);
  parallel_chunks(count, workers, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) out[i] = fn(i);
  });
  return out;
}

}  // namespace vsr
