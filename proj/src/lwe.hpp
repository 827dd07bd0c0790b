#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "bytes.hpp"
#include "hash.hpp"
#include "rng.hpp"

namespace qsafev {

// Hybrid encryption encapsulates a 128-bit data key bit by bit.
inline constexpr std::uint32_t kDekBits = 128;
inline constexpr std::size_t kMaxPlaintext = 64 * 1024;

struct LweParams {
  std::uint32_t n = 128;  // secret dimension
  std::uint32_t m = 256;  // samples
  std::uint32_t q = 4093; // odd prime modulus
  std::uint32_t eta = 4;  // error bound

  void validate() const;  // ParamError
  unsigned value_bits() const;
  Bytes wire() const;
  friend bool operator==(const LweParams&, const LweParams&) = default;
};

struct LweMatrix {
  std::uint32_t rows = 0, cols = 0;
  std::vector<std::uint16_t> v;  // row-major
  std::uint16_t at(std::uint32_t r, std::uint32_t c) const { return v[std::size_t(r) * cols + c]; }
  const std::uint16_t* row(std::uint32_t r) const { return v.data() + std::size_t(r) * cols; }
};

// Uniform matrix deterministically expanded from a 32-octet seed.
LweMatrix expand_matrix(std::uint32_t rows, std::uint32_t cols, std::uint32_t q,
                        const HashDigest& seed, std::string_view label);

class LwePublicKey {
 public:
  LwePublicKey() = default;
  LwePublicKey(LweParams params, HashDigest a_seed, std::vector<std::uint16_t> b);

  const LweParams& params() const { return params_; }
  const HashDigest& a_seed() const { return a_seed_; }
  const std::vector<std::uint16_t>& b() const { return b_; }
  const LweMatrix& a() const;  // expanded lazily, then cached

  // Compact transport form: params, matrix seed, b.
  Bytes wire() const;
  static LwePublicKey from_wire(ByteView);
  // Fingerprint of the wire form; registry and trace identifier.
  const HashDigest& digest() const;
  // Full canonical serialization with the matrix written out row-major,
  // little-endian; the `kat` vectors digest this form.
  Bytes canonical() const;

 private:
  LweParams params_;
  HashDigest a_seed_{};
  std::vector<std::uint16_t> b_;
  mutable std::shared_ptr<const LweMatrix> a_cache_;
  mutable std::optional<HashDigest> digest_cache_;
};

struct LweSecretKey {
  LweParams params;
  std::vector<std::uint16_t> s;
  Bytes wire() const;
  static LweSecretKey from_wire(ByteView);
};

struct LweKeyPair {
  LwePublicKey pub;
  LweSecretKey sec;
};

// Deterministic for a fixed (params, seed); secret uniform over Z_q^n,
// error uniform in [-eta, eta].
LweKeyPair lwe_keygen(const LweParams& params, std::uint64_t seed);

// b - A*s reduced to the centered interval; true iff all entries within eta.
bool keypair_consistent(const LwePublicKey&, const LweSecretKey&);

struct Ciphertext {
  Bytes payload;
  HashDigest tag{};
  Bytes wire() const;
  static Ciphertext from_wire(ByteView);
  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

// Randomized hybrid encryption: per-bit lattice encapsulation of a fresh data
// key, XOF keystream over the body, and a tag binding key and payload.
Ciphertext pke_encrypt(const LwePublicKey&, ByteView plaintext, Rng&);

// TagError on any tampering or key mismatch; CodecError on malformed layout.
Bytes pke_decrypt(const LweSecretKey&, const Ciphertext&);

// Canonical public-key digest for known-answer vectors.
HashDigest kat_public_key_digest(const LweParams&, std::uint64_t seed);

}  // namespace qsafev
