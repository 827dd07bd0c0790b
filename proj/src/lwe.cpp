#include "lwe.hpp"

#include <bit>
#include <cstring>

#include "errors.hpp"

namespace qsafev {

namespace {

bool is_odd_prime(std::uint32_t q) {
  if (q < 3 || q % 2 == 0) return false;
  for (std::uint32_t d = 3; d * d <= q; d += 2)
    if (q % d == 0) return false;
  return true;
}

// Counter-block XOF stream with unbiased 16-bit rejection sampling. The
// first block is sized to the expected draw volume so one XOF call usually
// covers the whole expansion.
class XofSampler {
 public:
  XofSampler(ByteView seed, std::string_view label, std::size_t hint_bytes = 1 << 14)
      : seed_(seed.begin(), seed.end()), label_(label), first_block_(hint_bytes + 512) {}

  std::uint16_t next16() {
    if (pos_ + 2 > buf_.size()) refill();
    std::uint16_t v = static_cast<std::uint16_t>(buf_[pos_] | (buf_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::uint32_t below(std::uint32_t bound) {
    const std::uint32_t zone = 65536u / bound * bound;
    std::uint32_t v;
    do {
      v = next16();
    } while (v >= zone);
    return v % bound;
  }

  std::uint8_t next8() {
    if (pos_ + 1 > buf_.size()) refill();
    return buf_[pos_++];
  }

 private:
  void refill() {
    std::size_t len = block_ == 0 ? first_block_ : std::size_t(1) << 13;
    buf_ = shake256(view(lp_concat({view(label_), view(seed_), view(le32(block_++))})), len);
    pos_ = 0;
  }
  Bytes seed_;
  std::string label_;
  std::size_t first_block_;
  Bytes buf_;
  std::size_t pos_ = 0;
  std::uint32_t block_ = 0;
};

std::uint64_t dot_mod(const std::uint16_t* a, const std::uint16_t* s, std::uint32_t n,
                      std::uint32_t q) {
  std::uint64_t acc = 0;
  for (std::uint32_t j = 0; j < n; ++j) acc += std::uint64_t(a[j]) * s[j];
  return acc % q;
}

}  // namespace

void LweParams::validate() const {
  if (n == 0 || m == 0) throw ParamError("lattice dimensions must be positive");
  if (m < n) throw ParamError("sample count m must be at least the dimension n");
  if (n > 4096 || m > 4096) throw ParamError("lattice dimensions capped at 4096");
  if (eta == 0) throw ParamError("error bound eta must be positive");
  if (q > 65521) throw ParamError("modulus q must fit 16 bits");
  if (!is_odd_prime(q)) throw ParamError("modulus q must be an odd prime");
  if (q <= 4ull * n * eta) throw ParamError("q must exceed 4*n*eta for decryption margin");
}

unsigned LweParams::value_bits() const {
  return static_cast<unsigned>(std::bit_width(q - 1));
}

Bytes LweParams::wire() const {
  ByteWriter w;
  w.u32(n);
  w.u32(m);
  w.u32(q);
  w.u32(eta);
  return w.take();
}

LweMatrix expand_matrix(std::uint32_t rows, std::uint32_t cols, std::uint32_t q,
                        const HashDigest& seed, std::string_view label) {
  LweMatrix a;
  a.rows = rows;
  a.cols = cols;
  a.v.resize(std::size_t(rows) * cols);
  XofSampler xof(dv(seed), label, a.v.size() * 2);
  for (auto& e : a.v) e = static_cast<std::uint16_t>(xof.below(q));
  return a;
}

LwePublicKey::LwePublicKey(LweParams params, HashDigest a_seed, std::vector<std::uint16_t> b)
    : params_(params), a_seed_(a_seed), b_(std::move(b)) {}

const LweMatrix& LwePublicKey::a() const {
  if (!a_cache_)
    a_cache_ = std::make_shared<LweMatrix>(
        expand_matrix(params_.m, params_.n, params_.q, a_seed_, "QSAFEV.LWE.A"));
  return *a_cache_;
}

Bytes LwePublicKey::wire() const {
  ByteWriter w;
  w.raw(view(params_.wire()));
  w.raw(dv(a_seed_));
  for (std::uint16_t e : b_) w.u16(e);
  return w.take();
}

LwePublicKey LwePublicKey::from_wire(ByteView bytes) {
  ByteReader r(bytes);
  LweParams p;
  p.n = r.u32();
  p.m = r.u32();
  p.q = r.u32();
  p.eta = r.u32();
  p.validate();
  HashDigest seed{};
  Bytes sb = r.raw(kDigestLen);
  std::copy(sb.begin(), sb.end(), seed.begin());
  std::vector<std::uint16_t> b(p.m);
  for (auto& e : b) {
    e = r.u16();
    if (e >= p.q) throw CodecError("public key entry out of range");
  }
  r.expect_end();
  return LwePublicKey(p, seed, std::move(b));
}

const HashDigest& LwePublicKey::digest() const {
  if (!digest_cache_) digest_cache_ = sha3_256(view(wire()));
  return *digest_cache_;
}

Bytes LwePublicKey::canonical() const {
  const LweMatrix& m = a();
  ByteWriter w;
  w.raw(view(params_.wire()));
  for (std::uint16_t e : m.v) w.u16(e);
  for (std::uint16_t e : b_) w.u16(e);
  return w.take();
}

Bytes LweSecretKey::wire() const {
  ByteWriter w;
  w.raw(view(params.wire()));
  for (std::uint16_t e : s) w.u16(e);
  return w.take();
}

LweSecretKey LweSecretKey::from_wire(ByteView bytes) {
  ByteReader r(bytes);
  LweSecretKey k;
  k.params.n = r.u32();
  k.params.m = r.u32();
  k.params.q = r.u32();
  k.params.eta = r.u32();
  k.params.validate();
  k.s.resize(k.params.n);
  for (auto& e : k.s) {
    e = r.u16();
    if (e >= k.params.q) throw CodecError("secret key entry out of range");
  }
  r.expect_end();
  return k;
}

LweKeyPair lwe_keygen(const LweParams& params, std::uint64_t seed) {
  params.validate();
  HashDigest a_seed =
      hash_concat({view("QSAFEV.LWE.SEED"), view(le64(seed)), view(params.wire())});
  LweMatrix a = expand_matrix(params.m, params.n, params.q, a_seed, "QSAFEV.LWE.A");

  Rng rng(derive_seed(seed, "qsafev.lwe.secret"));
  std::vector<std::uint16_t> s(params.n);
  for (auto& e : s) e = static_cast<std::uint16_t>(rng.below(params.q));

  std::vector<std::uint16_t> b(params.m);
  for (std::uint32_t i = 0; i < params.m; ++i) {
    std::int64_t err = static_cast<std::int64_t>(rng.below(2 * params.eta + 1)) -
                       static_cast<std::int64_t>(params.eta);
    std::int64_t val =
        (static_cast<std::int64_t>(dot_mod(a.row(i), s.data(), params.n, params.q)) + err +
         params.q) %
        params.q;
    b[i] = static_cast<std::uint16_t>(val);
  }

  LweKeyPair kp;
  kp.pub = LwePublicKey(params, a_seed, std::move(b));
  kp.sec = LweSecretKey{params, std::move(s)};
  return kp;
}

bool keypair_consistent(const LwePublicKey& pub, const LweSecretKey& sec) {
  if (!(pub.params() == sec.params)) return false;
  const LweParams& p = pub.params();
  const LweMatrix& a = pub.a();
  for (std::uint32_t i = 0; i < p.m; ++i) {
    std::uint32_t as = static_cast<std::uint32_t>(dot_mod(a.row(i), sec.s.data(), p.n, p.q));
    std::uint32_t diff = (pub.b()[i] + p.q - as) % p.q;
    std::uint32_t centered = std::min(diff, p.q - diff);
    if (centered > p.eta) return false;
  }
  return true;
}

Bytes Ciphertext::wire() const {
  ByteWriter w;
  w.field(view(payload));
  w.raw(dv(tag));
  return w.take();
}

Ciphertext Ciphertext::from_wire(ByteView bytes) {
  ByteReader r(bytes);
  Ciphertext ct;
  ct.payload = r.field();
  Bytes t = r.raw(kDigestLen);
  std::copy(t.begin(), t.end(), ct.tag.begin());
  r.expect_end();
  return ct;
}

namespace {

Bytes keystream(ByteView dek, std::size_t len) {
  if (len == 0) return {};
  return shake256(view(lp_concat({view("QSAFEV.PKE.KS"), dek})), len);
}

HashDigest payload_tag(ByteView dek, ByteView payload) {
  return hash_concat({view("QSAFEV.PKE.TAG"), dek, payload});
}

}  // namespace

Ciphertext pke_encrypt(const LwePublicKey& pk, ByteView plaintext, Rng& rng) {
  const LweParams& p = pk.params();
  if (plaintext.size() > kMaxPlaintext)
    throw SizeError("plaintext exceeds configured maximum of 64 KiB");

  Bytes dek = rng.bytes(kDekBits / 8);
  const LweMatrix& a = pk.a();
  const unsigned width = p.value_bits();
  const std::uint32_t half = p.q / 2;

  BitPacker packer(width);
  std::vector<std::uint32_t> acc(p.n);
  for (std::uint32_t k = 0; k < kDekBits; ++k) {
    const bool bit = (dek[k / 8] >> (k % 8)) & 1;
    std::fill(acc.begin(), acc.end(), 0u);
    std::uint32_t bacc = 0;
    std::uint64_t word = 0;
    for (std::uint32_t i = 0; i < p.m; ++i) {
      if (i % 64 == 0) word = rng.u64();
      if ((word >> (i % 64)) & 1) {
        const std::uint16_t* row = a.row(i);
        for (std::uint32_t j = 0; j < p.n; ++j) acc[j] += row[j];
        bacc += pk.b()[i];
      }
    }
    for (std::uint32_t j = 0; j < p.n; ++j) packer.put(acc[j] % p.q);
    packer.put((bacc + (bit ? half : 0)) % p.q);
  }

  Bytes lwe_section = packer.take();
  Bytes body = xor_bytes(plaintext, view(keystream(view(dek), plaintext.size())));

  ByteWriter w;
  w.u32(kDekBits);
  w.u32(static_cast<std::uint32_t>(body.size()));
  w.raw(view(lwe_section));
  w.raw(view(body));

  Ciphertext ct;
  ct.payload = w.take();
  ct.tag = payload_tag(view(dek), view(ct.payload));
  return ct;
}

Bytes pke_decrypt(const LweSecretKey& sk, const Ciphertext& ct) {
  const LweParams& p = sk.params;
  ByteReader r(view(ct.payload));
  const std::uint32_t dek_bits = r.u32();
  const std::uint32_t body_len = r.u32();
  if (dek_bits == 0 || dek_bits > 4096 || dek_bits % 8 != 0)
    throw CodecError("unsupported data key width");
  if (body_len > kMaxPlaintext) throw CodecError("body length out of range");

  const unsigned width = p.value_bits();
  const std::size_t section_len =
      (std::size_t(dek_bits) * (p.n + 1) * width + 7) / 8;
  if (r.remaining() != section_len + body_len) throw CodecError("ciphertext layout mismatch");
  Bytes section = r.raw(section_len);
  Bytes body = r.raw(body_len);

  Bytes dek(dek_bits / 8, 0);
  BitUnpacker unpacker(view(section), width);
  std::vector<std::uint16_t> avec(p.n);
  for (std::uint32_t k = 0; k < dek_bits; ++k) {
    for (std::uint32_t j = 0; j < p.n; ++j)
      avec[j] = static_cast<std::uint16_t>(unpacker.get() % p.q);
    std::uint32_t bval = unpacker.get() % p.q;
    std::uint32_t as = static_cast<std::uint32_t>(dot_mod(avec.data(), sk.s.data(), p.n, p.q));
    std::uint32_t d = (bval + p.q - as) % p.q;
    std::uint32_t dist0 = std::min(d, p.q - d);
    std::uint32_t dist1 = d > p.q / 2 ? d - p.q / 2 : p.q / 2 - d;
    if (dist1 < dist0) dek[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
  }

  if (payload_tag(view(dek), view(ct.payload)) != ct.tag)
    throw TagError("ciphertext integrity check failed");
  return xor_bytes(view(body), view(keystream(view(dek), body.size())));
}

HashDigest kat_public_key_digest(const LweParams& params, std::uint64_t seed) {
  return sha3_256(view(lwe_keygen(params, seed).pub.canonical()));
}

}  // namespace qsafev
