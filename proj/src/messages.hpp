#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bytes.hpp"
#include "hash.hpp"
#include "lwe.hpp"

namespace qsafev {

enum class MsgType : std::uint8_t {
  MR1 = 1,  // encrypted registration request, vehicle -> authority
  MR2 = 2,  // registration response, authority -> vehicle
  M1 = 3,   // login/key-agreement opener, vehicle -> gateway
  M2 = 4,   // gateway envelope, gateway -> edge node
  M3 = 5,   // key confirmation material, edge node -> gateway
  M4 = 6,   // gateway forward of M3, gateway -> vehicle
};

const char* to_string(MsgType);

struct Mr1Body {
  Ciphertext request;  // Enc_PK_TA(real identity)
};

struct Mr2Body {
  HashDigest qit_chain{};  // one-way binding of the issued token's chain value
  Bytes sk_material;       // holder's private key, secure channel only
  Bytes pk_wire;
  HashDigest pid_rg{};
  HashDigest check{};  // delivery integrity over the fields above
};

struct M1Body {
  Bytes r_i;             // 32-octet session nonce
  Ciphertext token_blob; // Enc_PK_VEN(chain || pid || t1)
  Bytes pk_wire;
  Timestamp t1{};
};

struct M2Body {
  Bytes r_i;
  Ciphertext envelope;  // Enc_PK_VEN(D || token_blob || pk || t1 || t2)
  Timestamp t2{};
};

struct M3Body {
  Bytes f;  // r_j masked with h(pid || t3)
  HashDigest skv{};
  Timestamp t3{};
};

struct M4Body {
  HashDigest skv{};
  Bytes f;
  Timestamp t3{};
  Timestamp t4{};
  HashDigest gw_tag{};  // h(pid_rg || skv || f || t3 || t4)
};

using MessageBody = std::variant<Mr1Body, Mr2Body, M1Body, M2Body, M3Body, M4Body>;

struct ProtocolMessage {
  MsgType type{};
  std::string sender;
  std::string receiver;
  Timestamp sent_at{};
  MessageBody body;
};

// Canonical binary codec: variant tag octet, length-prefixed fields,
// little-endian integers. Decode failures raise CodecError.
Bytes encode_message(const ProtocolMessage&);
ProtocolMessage decode_message(ByteView);

// (field name, short digest or plain timestamp) pairs for the trace; never
// raw field contents.
std::vector<std::pair<std::string, std::string>> field_digests(const ProtocolMessage&);

}  // namespace qsafev
