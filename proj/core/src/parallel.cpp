#include "tameval/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace tameval {
namespace {

std::atomic<std::size_t> g_max_threads{0};

std::size_t hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// Fixed chunk size so the partition of [0, count) is independent of the
// number of workers.
constexpr std::size_t kChunk = 256;

}  // namespace

std::size_t max_threads() {
  const std::size_t n = g_max_threads.load();
  return n == 0 ? hardware_threads() : n;
}

void set_max_threads(std::size_t n) { g_max_threads.store(n); }

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  const std::size_t workers = std::min(max_threads(), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      body(c * kChunk, std::min(count, (c + 1) * kChunk));
    }
    return;
  }

  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        body(c * kChunk, std::min(count, (c + 1) * kChunk));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace tameval
