#include "hash.hpp"

#include <openssl/evp.h>

#include <memory>

#include "errors.hpp"

namespace qsafev {

namespace {
struct CtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using CtxPtr = std::unique_ptr<EVP_MD_CTX, CtxDeleter>;
}  // namespace

HashDigest sha3_256(ByteView data) {
  HashDigest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha3_256(), nullptr) != 1 ||
      len != kDigestLen)
    throw Error("SHA3-256 failed");
  return out;
}

Bytes shake256(ByteView seed, std::size_t out_len) {
  Bytes out(out_len);
  CtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_shake256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), seed.data(), seed.size()) != 1 ||
      EVP_DigestFinalXOF(ctx.get(), out.data(), out.size()) != 1)
    throw Error("SHAKE256 failed");
  return out;
}

HashDigest hash_concat(std::initializer_list<ByteView> fields) {
  return sha3_256(view(lp_concat(fields)));
}

HashDigest to_digest(ByteView b) {
  if (b.size() != kDigestLen) throw LengthError("expected a 32-octet digest");
  HashDigest d{};
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

std::string short_digest(ByteView data) {
  HashDigest d = sha3_256(data);
  return hex(ByteView(d.data(), 8));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
  HashDigest d = hash_concat({view(le64(master)), view(label), view(le64(index))});
  std::uint64_t s = 0;
  for (int i = 0; i < 8; ++i) s |= static_cast<std::uint64_t>(d[i]) << (8 * i);
  return s;
}

}  // namespace qsafev
