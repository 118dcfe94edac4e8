#ifndef BLINDID_PARALLEL_HPP
#define BLINDID_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace blindid {

// Runs fn(begin, end) over `blocks` fixed, contiguous slices of [0, count).
// The slicing depends only on `count` and `blocks`, never on `workers`, so
// callers that write per-block results and reduce them in block order get
// output that is independent of the thread count.
template <typename Fn>
void parallel_blocks(std::size_t count, std::size_t blocks, int workers, Fn&& fn) {
  if (count == 0) return;
  blocks = std::clamp<std::size_t>(blocks, 1, count);
  auto slice = [&](std::size_t b) {
    const std::size_t begin = count * b / blocks;
    const std::size_t end = count * (b + 1) / blocks;
    fn(b, begin, end);
  };
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || blocks == 1) {
    for (std::size_t b = 0; b < blocks; ++b) slice(b);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const std::size_t used = std::min(threads, blocks);
  pool.reserve(used);
  for (std::size_t w = 0; w < used; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < blocks; b += used) {
        try {
          slice(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Element-wise variant: fn(i) for every i in [0, count).
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const std::size_t blocks = static_cast<std::size_t>(std::max(1, workers)) * 4;
  parallel_blocks(count, blocks, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace blindid

#endif  // BLINDID_PARALLEL_HPP
