#pragma once

// Seeded random streams and the chunked parallel driver.
//
// Work is split into fixed-size chunks and chunk c always draws from the
// substream derived from (seed, c). Results therefore depend only on the seed
// and never on how many worker threads picked the chunks up.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "pcsft/linops.hpp"

namespace pcsft {

using Rng = std::mt19937_64;

/// Samples per generation chunk.
inline constexpr std::size_t kSampleChunk = 4096;
/// Detector trials per chunk.
inline constexpr std::size_t kTrialChunk = 256;

/// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Substream key: mix(seed XOR mix(stream)).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Gaussian draws on top of one substream.
class GaussianSource {
 public:
  explicit GaussianSource(Rng rng) : rng_(std::move(rng)) {}
  GaussianSource(std::uint64_t seed, std::uint64_t stream) : rng_(make_stream(seed, stream)) {}

  double normal() { return normal_(rng_); }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance: real and
  /// imaginary parts are independent N(0, variance/2).
  Complex circular(double variance) {
    const double s = std::sqrt(0.5 * variance);
    const double re = normal_(rng_);
    const double im = normal_(rng_);
    return {s * re, s * im};
  }

 private:
  Rng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Number of worker threads used by parallel_for_chunks (default: hardware concurrency).
int worker_count();
/// Sets the worker count; values < 1 restore the default.
void set_worker_count(int workers);

/// Runs fn(chunk) for chunk in [0, n_chunks) on the worker pool. The first
/// exception thrown by any chunk is rethrown after all workers join.
template <class Fn>
void parallel_for_chunks(std::size_t n_chunks, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) {
          try {
            fn(c);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace pcsft
