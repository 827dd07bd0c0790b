#include "sis.hpp"

#include "errors.hpp"

namespace qsafev {

namespace {

// Uniform trits via rejection from an XOF over the message.
std::vector<std::int8_t> expand_opening(ByteView message, std::uint32_t n) {
  std::vector<std::int8_t> x;
  x.reserve(n);
  std::uint32_t block = 0;
  while (x.size() < n) {
    Bytes stream = shake256(
        view(lp_concat({view("QSAFEV.SIS.OPEN"), message, view(le32(block++))})), 2 * n + 64);
    for (std::uint8_t b : stream) {
      if (b >= 252) continue;  // 252..255 rejected: 252 = 3 * 84
      x.push_back(static_cast<std::int8_t>(b % 3 - 1));
      if (x.size() == n) break;
    }
  }
  return x;
}

std::vector<std::uint16_t> apply(const LweMatrix& a, std::uint32_t q,
                                 const std::vector<std::int8_t>& x) {
  std::vector<std::uint16_t> out(a.rows);
  for (std::uint32_t i = 0; i < a.rows; ++i) {
    std::int64_t acc = 0;
    const std::uint16_t* row = a.row(i);
    for (std::uint32_t j = 0; j < a.cols; ++j) acc += static_cast<std::int64_t>(row[j]) * x[j];
    out[i] = static_cast<std::uint16_t>(((acc % q) + q) % q);
  }
  return out;
}

}  // namespace

std::shared_ptr<const LweMatrix> sis_public_matrix(const LweParams& params, std::uint64_t seed) {
  params.validate();
  HashDigest mseed = hash_concat({view("QSAFEV.SIS.SEED"), view(le64(seed)), view(params.wire())});
  return std::make_shared<LweMatrix>(
      expand_matrix(params.m, params.n, params.q, mseed, "QSAFEV.SIS.A"));
}

SisCommitment sis_commit(std::shared_ptr<const LweMatrix> matrix, std::uint32_t q,
                         ByteView message) {
  SisCommitment c;
  c.matrix = std::move(matrix);
  c.q = q;
  c.opening = expand_opening(message, c.matrix->cols);
  c.value = apply(*c.matrix, q, c.opening);
  return c;
}

bool sis_verify(const LweMatrix& matrix, std::uint32_t q, ByteView message,
                const std::vector<std::uint16_t>& value) {
  return apply(matrix, q, expand_opening(message, matrix.cols)) == value;
}

bool sis_verify(const SisCommitment& c, ByteView message) {
  return sis_verify(*c.matrix, c.q, message, c.value);
}

}  // namespace qsafev
