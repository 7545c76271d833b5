#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace langevin::detail {

/// Runs fn(begin, end) over contiguous chain blocks on up to `threads`
/// workers. Work assignment never affects results: every chain's output is
/// a pure function of its index. The exception from the lowest block wins.
template <typename Fn>
void for_chain_blocks(std::uint64_t n, int threads, Fn&& fn) {
  const std::uint64_t workers =
      std::clamp<std::uint64_t>(threads < 1 ? 1 : threads, 1, std::max<std::uint64_t>(n, 1));
  if (workers == 1) {
    fn(std::uint64_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (n + workers - 1) / workers;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = std::min(n, w * chunk);
    const std::uint64_t end = std::min(n, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace langevin::detail
