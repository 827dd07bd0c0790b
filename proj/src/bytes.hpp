#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qsafev {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Simulated clock value, milliseconds since the scenario epoch.
struct Timestamp {
  std::int64_t millis = 0;
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}
inline ByteView view(const Bytes& b) {
  return ByteView(b.data(), b.size());
}
inline ByteView view(std::string_view s) {
  return ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

std::string hex(ByteView data);
Bytes unhex(std::string_view text);  // CodecError on bad input

// Elementwise XOR of equal-length strings. LengthError otherwise.
Bytes xor_bytes(ByteView a, ByteView b);

// Canonical concatenation for hashing: every field is preceded by its length
// as a 4-octet big-endian integer, so h(a || b) has an unambiguous preimage.
Bytes lp_concat(std::initializer_list<ByteView> fields);

Bytes le16(std::uint16_t v);
Bytes le32(std::uint32_t v);
Bytes le64(std::uint64_t v);
Bytes ts_bytes(Timestamp t);  // 8-octet little-endian two's complement

// Sequential little-endian writer for the binary codecs.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void ts(Timestamp t) { i64(t.millis); }
  void raw(ByteView v) { buf_.insert(buf_.end(), v.begin(), v.end()); }
  // Length-prefixed field (u32 little-endian length, then the bytes).
  void field(ByteView v);
  Bytes take() { return std::move(buf_); }
  const Bytes& data() const { return buf_; }

 private:
  Bytes buf_;
};

// Bounds-checked reader; every underflow raises CodecError.
class ByteReader {
 public:
  explicit ByteReader(ByteView v) : v_(v) {}
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  Timestamp ts() { return Timestamp{i64()}; }
  Bytes raw(std::size_t n);
  Bytes field();
  std::size_t remaining() const { return v_.size() - pos_; }
  void expect_end() const;  // CodecError if trailing bytes remain

 private:
  void need(std::size_t n) const;
  ByteView v_;
  std::size_t pos_ = 0;
};

// Packs fixed-width unsigned values (LSB first) into a byte stream; used for
// the lattice ciphertext body so payload bits stay uniformly distributed.
class BitPacker {
 public:
  explicit BitPacker(unsigned width) : width_(width) {}
  void put(std::uint32_t value);
  Bytes take();

 private:
  unsigned width_;
  Bytes buf_;
  std::uint64_t acc_ = 0;
  unsigned nbits_ = 0;
};

class BitUnpacker {
 public:
  BitUnpacker(ByteView data, unsigned width) : data_(data), width_(width) {}
  std::uint32_t get();  // CodecError past the end

 private:
  ByteView data_;
  unsigned width_;
  std::size_t pos_ = 0;
  std::uint64_t acc_ = 0;
  unsigned nbits_ = 0;
};

}  // namespace qsafev
