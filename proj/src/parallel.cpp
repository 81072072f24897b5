// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gmae {

int thread_count() {
  if (const char* env = std::getenv("GMAE_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return std::min(v, 256);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_chunks(long n, long chunk_size,
                     const std::function<void(long, long)>& fn) {
  if (n <= 0) return;
  if (chunk_size < 1) chunk_size = 1;
  long n_chunks = (n + chunk_size - 1) / chunk_size;
  int workers = std::min<long>(thread_count(), n_chunks);
  auto run_chunk = [&](long c) {
    long lo = c * chunk_size;
    long hi = std::min(n, lo + chunk_size);
    fn(lo, hi);
  };
  if (workers <= 1) {
    for (long c = 0; c < n_chunks; ++c) run_chunk(c);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (long c = next.fetch_add(1); c < n_chunks;
             c = next.fetch_add(1)) {
          run_chunk(c);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gmae
