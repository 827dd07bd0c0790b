#pragma once

#include <cstdint>
#include <random>

#include "bytes.hpp"

namespace qsafev {

// Deterministic random stream. The mt19937_64 engine is fully specified by
// the standard, and all deriving transforms below are written out explicitly,
// so a (seed, call sequence) pair yields identical values on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t u64() { return engine_(); }

  // Unbiased uniform draw from [0, bound).
  std::uint32_t below(std::uint32_t bound);

  bool bit();
  std::uint8_t byte();
  Bytes bytes(std::size_t n);

  // Uniform double in [0, 1).
  double unit() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  // Box-Muller; the spare value is cached, keeping the draw sequence
  // deterministic per call order.
  double normal(double mean, double sigma);

  Rng fork() { return Rng(u64()); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t bit_buf_ = 0;
  unsigned bit_count_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace qsafev
