#include "entrobridge/parallel.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace entrobridge {

std::size_t thread_budget() {
  std::size_t budget = 0;
  if (const char* env = std::getenv("ENTROBRIDGE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) budget = static_cast<std::size_t>(v);
  }
  if (budget == 0) budget = std::thread::hardware_concurrency();
  return budget == 0 ? 1 : budget;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::size_t threads = thread_budget();
  // Small ranges are not worth the spawn cost.
  if (threads <= 1 || n < 512) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (threads > n) threads = n;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    std::size_t begin = n * t / threads;
    std::size_t end = n * (t + 1) / threads;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace entrobridge
