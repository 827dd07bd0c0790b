#include "bytes.hpp"

#include "errors.hpp"

namespace qsafev {

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::Freshness: return "freshness";
    case RejectReason::Replay: return "replay";
    case RejectReason::UnknownKey: return "unknown-key";
    case RejectReason::GatewayAuth: return "gateway-auth";
    case RejectReason::TokenAuth: return "token-auth";
    case RejectReason::KeyConfirm: return "key-confirm";
    case RejectReason::Tag: return "tag";
    case RejectReason::Codec: return "codec";
    case RejectReason::Routing: return "routing";
    case RejectReason::State: return "state";
    case RejectReason::Login: return "login";
    case RejectReason::Timeout: return "timeout";
  }
  return "unknown";
}

std::string hex(ByteView data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

static int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

Bytes unhex(std::string_view text) {
  if (text.size() % 2 != 0) throw CodecError("hex string has odd length");
  Bytes out;
  out.reserve(text.size() / 2);
  for (std::size_t i = 0; i < text.size(); i += 2) {
    int hi = hex_val(text[i]);
    int lo = hex_val(text[i + 1]);
    if (hi < 0 || lo < 0) throw CodecError("invalid hex digit");
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

Bytes xor_bytes(ByteView a, ByteView b) {
  if (a.size() != b.size())
    throw LengthError("xor operands differ in length: " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  Bytes out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

Bytes lp_concat(std::initializer_list<ByteView> fields) {
  std::size_t total = 0;
  for (const auto& f : fields) total += 4 + f.size();
  Bytes out;
  out.reserve(total);
  for (const auto& f : fields) {
    std::uint32_t n = static_cast<std::uint32_t>(f.size());
    out.push_back(static_cast<std::uint8_t>(n >> 24));
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(n));
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

Bytes le16(std::uint16_t v) {
  return Bytes{static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
}

Bytes le32(std::uint32_t v) {
  Bytes out(4);
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return out;
}

Bytes le64(std::uint64_t v) {
  Bytes out(8);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return out;
}

Bytes ts_bytes(Timestamp t) {
  return le64(static_cast<std::uint64_t>(t.millis));
}

void ByteWriter::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v));
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::field(ByteView v) {
  u32(static_cast<std::uint32_t>(v.size()));
  raw(v);
}

void ByteReader::need(std::size_t n) const {
  if (pos_ + n > v_.size()) throw CodecError("message truncated");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return v_[pos_++];
}

std::uint16_t ByteReader::u16() {
  need(2);
  std::uint16_t v = static_cast<std::uint16_t>(v_[pos_] | (v_[pos_ + 1] << 8));
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(v_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(v_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

Bytes ByteReader::raw(std::size_t n) {
  need(n);
  Bytes out(v_.begin() + pos_, v_.begin() + pos_ + n);
  pos_ += n;
  return out;
}

Bytes ByteReader::field() {
  std::uint32_t n = u32();
  return raw(n);
}

void ByteReader::expect_end() const {
  if (pos_ != v_.size()) throw CodecError("trailing bytes after message");
}

void BitPacker::put(std::uint32_t value) {
  acc_ |= static_cast<std::uint64_t>(value) << nbits_;
  nbits_ += width_;
  while (nbits_ >= 8) {
    buf_.push_back(static_cast<std::uint8_t>(acc_));
    acc_ >>= 8;
    nbits_ -= 8;
  }
}

Bytes BitPacker::take() {
  if (nbits_ > 0) {
    buf_.push_back(static_cast<std::uint8_t>(acc_));
    acc_ = 0;
    nbits_ = 0;
  }
  return std::move(buf_);
}

std::uint32_t BitUnpacker::get() {
  while (nbits_ < width_) {
    if (pos_ >= data_.size()) throw CodecError("bit stream exhausted");
    acc_ |= static_cast<std::uint64_t>(data_[pos_++]) << nbits_;
    nbits_ += 8;
  }
  std::uint32_t v = static_cast<std::uint32_t>(acc_ & ((1ull << width_) - 1));
  acc_ >>= width_;
  nbits_ -= width_;
  return v;
}

}  // namespace qsafev
