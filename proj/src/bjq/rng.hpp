#pragma once

#include <cstdint>
#include <random>

namespace bjq {

// Deterministic random stream. All distribution transforms are implemented
// here rather than with std:: distributions, so a given (seed, substream)
// pair produces the same draws on every run and toolchain. Replicates of a
// simulation each own an independent substream keyed by their index, which
// keeps parallel execution bit-reproducible.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : RngStream(seed, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t substream);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform01();
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  bool bernoulli(double p) { return uniform01() < p; }
  // Standard normal via Box-Muller.
  double normal(double mean = 0.0, double sd = 1.0);
  // Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace bjq
