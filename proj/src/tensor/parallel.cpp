#include "amt/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace amt {
namespace {

std::atomic<int> g_threads{
    std::max(1, static_cast<int>(std::thread::hardware_concurrency()))};

}  // namespace

void set_num_threads(int threads) { g_threads = std::max(1, threads); }

int num_threads() { return g_threads; }

void parallel_for(int begin, int end, const std::function<void(int)>& fn) {
  const int total = end - begin;
  if (total <= 0) return;
  const int workers = std::min(num_threads(), total);
  if (workers == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (total + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    const int lo = begin + t * chunk;
    const int hi = std::min(end, lo + chunk);
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace amt
