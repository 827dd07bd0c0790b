#include "rng.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"

namespace qsafev {

std::uint32_t Rng::below(std::uint32_t bound) {
  if (bound == 0) throw ParamError("bound must be positive");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t zone = max / bound * bound;
  std::uint64_t x;
  do {
    x = u64();
  } while (x >= zone);
  return static_cast<std::uint32_t>(x % bound);
}

bool Rng::bit() {
  if (bit_count_ == 0) {
    bit_buf_ = u64();
    bit_count_ = 64;
  }
  bool b = bit_buf_ & 1;
  bit_buf_ >>= 1;
  --bit_count_;
  return b;
}

std::uint8_t Rng::byte() {
  return static_cast<std::uint8_t>(below(256));
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out(n);
  std::size_t i = 0;
  while (i + 8 <= n) {
    std::uint64_t w = u64();
    for (int k = 0; k < 8; ++k) out[i++] = static_cast<std::uint8_t>(w >> (8 * k));
  }
  if (i < n) {
    std::uint64_t w = u64();
    while (i < n) {
      out[i++] = static_cast<std::uint8_t>(w);
      w >>= 8;
    }
  }
  return out;
}

double Rng::normal(double mean, double sigma) {
  if (have_spare_) {
    have_spare_ = false;
    return mean + sigma * spare_;
  }
  // u1 in (0, 1] avoids log(0).
  double u1 = (static_cast<double>(u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = unit();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return mean + sigma * r * std::cos(theta);
}

}  // namespace qsafev
