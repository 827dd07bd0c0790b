#pragma once

#include <cstdint>
#include <string_view>

#include "bytes.hpp"

namespace qsafev {

inline constexpr std::size_t kDigestLen = 32;
using HashDigest = std::array<std::uint8_t, kDigestLen>;

inline ByteView dv(const HashDigest& d) {
  return ByteView(d.data(), d.size());
}
inline Bytes digest_bytes(const HashDigest& d) {
  return Bytes(d.begin(), d.end());
}

HashDigest sha3_256(ByteView data);

// Arbitrary-length XOF output; used for keystreams and deterministic
// expansion of matrices and commitment openings.
Bytes shake256(ByteView seed, std::size_t out_len);

// h(a || b || ...) with the canonical length-prefixed joining.
HashDigest hash_concat(std::initializer_list<ByteView> fields);

HashDigest to_digest(ByteView b);  // LengthError unless exactly 32 octets

inline HashDigest xor_digests(const HashDigest& a, const HashDigest& b) {
  HashDigest out;
  for (std::size_t i = 0; i < kDigestLen; ++i) out[i] = a[i] ^ b[i];
  return out;
}

// First 8 digest octets in hex; identifies field contents in traces without
// exposing them.
std::string short_digest(ByteView data);

// Stable sub-seed derivation so worlds, entities and experiment runs draw
// from independent deterministic streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

}  // namespace qsafev
