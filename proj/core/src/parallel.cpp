#include "meshstyle/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace meshstyle {

int worker_count() {
  int n = int(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("MESHSTYLE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0 && cap < n) n = int(cap);
  }
  return n;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t grain) {
  if (count == 0) return;
  if (grain < 1) grain = 1;

  const int workers = worker_count();
  if (workers <= 1 || count <= grain) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto run = [&] {
    for (;;) {
      const std::size_t lo = next.fetch_add(grain);
      if (lo >= count) return;
      const std::size_t hi = std::min(lo + grain, count);
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace meshstyle
