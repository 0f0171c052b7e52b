#pragma once

/// \file parallel.hpp
/// \brief Static-partition parallel loops with results that do not depend on
/// the number of threads.

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace wavegauge {

namespace detail {
inline int& thread_setting() {
  static int n = 0;
  return n;
}
}  // namespace detail

/// Worker count: explicit setting, else WAVEGAUGE_THREADS, else 1.
inline int thread_count() {
  if (detail::thread_setting() > 0) return detail::thread_setting();
  if (const char* env = std::getenv("WAVEGAUGE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

inline void set_thread_count(int n) { detail::thread_setting() = n > 0 ? n : 0; }

/// Calls body(i) for i in [begin, end), split into contiguous blocks.
/// Each index is visited exactly once; body must not write shared state
/// except through index-private slots. An exception from any block is
/// rethrown after all workers finish (lowest block wins).
template <class Body>
void parallel_for(int begin, int end, Body&& body) {
  const int count = end - begin;
  if (count <= 0) return;
  const int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto run_block = [&](int w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(count) * w / workers);
    const int hi = begin + static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
    try {
      for (int i = lo; i < hi; ++i) body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  for (int w = 1; w < workers; ++w) pool.emplace_back(run_block, w);
  run_block(0);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Deterministic sum: per-index partials reduced in index order.
template <class Body>
double parallel_sum(int begin, int end, Body&& partial) {
  if (end <= begin) return 0.0;
  std::vector<double> parts(static_cast<std::size_t>(end - begin), 0.0);
  parallel_for(begin, end, [&](int i) { parts[static_cast<std::size_t>(i - begin)] = partial(i); });
  double s = 0.0;
  for (double p : parts) s += p;
  return s;
}

/// Deterministic max over per-index partials.
template <class Body>
double parallel_max(int begin, int end, Body&& partial) {
  if (end <= begin) return 0.0;
  std::vector<double> parts(static_cast<std::size_t>(end - begin), 0.0);
  parallel_for(begin, end, [&](int i) { parts[static_cast<std::size_t>(i - begin)] = partial(i); });
  double m = parts[0];
  for (double p : parts) m = std::max(m, p);
  return m;
}

}  // namespace wavegauge
