#pragma once

#include <memory>
#include <vector>

#include "bytes.hpp"
#include "hash.hpp"
#include "lwe.hpp"

namespace qsafev {

// Hash-to-short-vector commitment over a public SIS matrix. The opening is a
// {-1,0,1}^n vector expanded deterministically from the message, and the
// commitment value is A*x mod q.
struct SisCommitment {
  std::shared_ptr<const LweMatrix> matrix;
  std::uint32_t q = 0;
  std::vector<std::uint16_t> value;   // length m
  std::vector<std::int8_t> opening;   // length n, entries in {-1, 0, 1}
};

std::shared_ptr<const LweMatrix> sis_public_matrix(const LweParams&, std::uint64_t seed);

SisCommitment sis_commit(std::shared_ptr<const LweMatrix> matrix, std::uint32_t q,
                         ByteView message);

// Recomputes the opening from the message and compares A*x against value.
bool sis_verify(const LweMatrix& matrix, std::uint32_t q, ByteView message,
                const std::vector<std::uint16_t>& value);
bool sis_verify(const SisCommitment&, ByteView message);

}  // namespace qsafev
