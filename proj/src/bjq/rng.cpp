#include "bjq/rng.hpp"

#include <cmath>

#include "bjq/errors.hpp"

namespace bjq {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t substream) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed & 0xffffffffu),
      static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(substream & 0xffffffffu),
      static_cast<std::uint32_t>(substream >> 32),
  };
  engine_.seed(seq);
}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal(double mean, double sd) {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  return mean + sd * z;
}

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw validation_error("uniform_index: n must be positive");
  auto idx = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

}  // namespace bjq
