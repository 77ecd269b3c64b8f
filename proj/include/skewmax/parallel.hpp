#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace skewmax {

/// Run body(i) for i in [0, count) on `workers` threads. Work is handed out
/// in index order; callers write results into per-index slots so the outcome
/// never depends on the worker count. The first exception thrown is rethrown.
template <class Body>
void parallel_for(std::size_t count, int workers, Body &&body) {
  if (count == 0) return;
  const auto nthreads = static_cast<std::size_t>(std::max(1, workers));
  if (nthreads == 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_lock;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_lock);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(std::min(nthreads, count) - 1);
  for (std::size_t t = 1; t < std::min(nthreads, count); ++t) pool.emplace_back(run);
  run();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

/// Samples are drawn in fixed-size blocks, each block from its own engine
/// seeded by (seed, stream, block). Any partition of blocks across workers
/// therefore reproduces the same sample sequence.
inline constexpr std::size_t kSampleBlock = 4096;

inline std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return std::mt19937_64(seq);
}

/// Draw `count` samples with body(index, engine) using the block scheme.
template <class Body>
void sample_blocks(std::size_t count, std::uint64_t seed, std::uint64_t stream, int workers, Body &&body) {
  const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    auto engine = block_engine(seed, stream, b);
    const std::size_t end = std::min(count, (b + 1) * kSampleBlock);
    for (std::size_t i = b * kSampleBlock; i < end; ++i) body(i, engine);
  });
}

}  // namespace skewmax
