#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace gbsplit {

/// Samples per Monte Carlo batch. Batch b always draws from substream b, so
/// results do not depend on how many workers run.
inline constexpr std::size_t kBatchSize = 1u << 14;

inline std::size_t batch_count(std::size_t total) { return (total + kBatchSize - 1) / kBatchSize; }

inline std::size_t batch_length(std::size_t total, std::size_t batch) {
  return std::min(kBatchSize, total - batch * kBatchSize);
}

/// Evaluates fn(0), ..., fn(batches - 1) on a pool of worker threads and returns
/// the results in index order. The first exception thrown by any batch is rethrown.
template <class Fn>
auto map_batches(std::size_t batches, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Result> results(batches);
  if (batches == 0) return results;

  const std::size_t workers =
      std::min<std::size_t>(batches, std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < batches; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = batches;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace gbsplit
