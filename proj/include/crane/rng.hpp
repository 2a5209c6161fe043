#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace crane {

// Deterministic random source. mt19937_64 raw output is pinned by the
// standard, and all distributions below are hand-rolled on top of it, so a
// given seed yields the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller, cosine branch only. Consumes exactly two
  // engine draws per call.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// Child seed for a named component, so one root seed drives the whole
// pipeline without stream overlap between components.
std::uint64_t derive_seed(std::uint64_t root, std::string_view component);

// In-place Fisher-Yates shuffle driven by Rng (std::shuffle is
// implementation-defined and would break cross-platform determinism).
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace crane
