#include "messages.hpp"

#include "errors.hpp"

namespace qsafev {

const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::MR1: return "MR1";
    case MsgType::MR2: return "MR2";
    case MsgType::M1: return "M1";
    case MsgType::M2: return "M2";
    case MsgType::M3: return "M3";
    case MsgType::M4: return "M4";
  }
  return "?";
}

namespace {

void write_digest(ByteWriter& w, const HashDigest& d) {
  w.raw(dv(d));
}

HashDigest read_digest(ByteReader& r) {
  Bytes b = r.raw(kDigestLen);
  HashDigest d{};
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

}  // namespace

Bytes encode_message(const ProtocolMessage& msg) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(msg.type));
  w.field(view(msg.sender));
  w.field(view(msg.receiver));
  w.ts(msg.sent_at);
  switch (msg.type) {
    case MsgType::MR1: {
      const auto& b = std::get<Mr1Body>(msg.body);
      w.field(view(b.request.wire()));
      break;
    }
    case MsgType::MR2: {
      const auto& b = std::get<Mr2Body>(msg.body);
      write_digest(w, b.qit_chain);
      w.field(view(b.sk_material));
      w.field(view(b.pk_wire));
      write_digest(w, b.pid_rg);
      write_digest(w, b.check);
      break;
    }
    case MsgType::M1: {
      const auto& b = std::get<M1Body>(msg.body);
      w.field(view(b.r_i));
      w.field(view(b.token_blob.wire()));
      w.field(view(b.pk_wire));
      w.ts(b.t1);
      break;
    }
    case MsgType::M2: {
      const auto& b = std::get<M2Body>(msg.body);
      w.field(view(b.r_i));
      w.field(view(b.envelope.wire()));
      w.ts(b.t2);
      break;
    }
    case MsgType::M3: {
      const auto& b = std::get<M3Body>(msg.body);
      w.field(view(b.f));
      write_digest(w, b.skv);
      w.ts(b.t3);
      break;
    }
    case MsgType::M4: {
      const auto& b = std::get<M4Body>(msg.body);
      write_digest(w, b.skv);
      w.field(view(b.f));
      w.ts(b.t3);
      w.ts(b.t4);
      write_digest(w, b.gw_tag);
      break;
    }
  }
  return w.take();
}

ProtocolMessage decode_message(ByteView bytes) {
  ByteReader r(bytes);
  ProtocolMessage msg;
  std::uint8_t tag = r.u8();
  if (tag < 1 || tag > 6) throw CodecError("unknown message variant");
  msg.type = static_cast<MsgType>(tag);
  Bytes sender = r.field();
  Bytes receiver = r.field();
  msg.sender.assign(sender.begin(), sender.end());
  msg.receiver.assign(receiver.begin(), receiver.end());
  msg.sent_at = r.ts();
  switch (msg.type) {
    case MsgType::MR1: {
      Mr1Body b;
      b.request = Ciphertext::from_wire(view(r.field()));
      msg.body = std::move(b);
      break;
    }
    case MsgType::MR2: {
      Mr2Body b;
      b.qit_chain = read_digest(r);
      b.sk_material = r.field();
      b.pk_wire = r.field();
      b.pid_rg = read_digest(r);
      b.check = read_digest(r);
      msg.body = std::move(b);
      break;
    }
    case MsgType::M1: {
      M1Body b;
      b.r_i = r.field();
      b.token_blob = Ciphertext::from_wire(view(r.field()));
      b.pk_wire = r.field();
      b.t1 = r.ts();
      msg.body = std::move(b);
      break;
    }
    case MsgType::M2: {
      M2Body b;
      b.r_i = r.field();
      b.envelope = Ciphertext::from_wire(view(r.field()));
      b.t2 = r.ts();
      msg.body = std::move(b);
      break;
    }
    case MsgType::M3: {
      M3Body b;
      b.f = r.field();
      b.skv = read_digest(r);
      b.t3 = r.ts();
      msg.body = std::move(b);
      break;
    }
    case MsgType::M4: {
      M4Body b;
      b.skv = read_digest(r);
      b.f = r.field();
      b.t3 = r.ts();
      b.t4 = r.ts();
      b.gw_tag = read_digest(r);
      msg.body = std::move(b);
      break;
    }
  }
  r.expect_end();
  return msg;
}

std::vector<std::pair<std::string, std::string>> field_digests(const ProtocolMessage& msg) {
  std::vector<std::pair<std::string, std::string>> out;
  auto dig = [&](const char* name, ByteView v) { out.emplace_back(name, short_digest(v)); };
  auto stamp = [&](const char* name, Timestamp t) {
    out.emplace_back(name, std::to_string(t.millis));
  };
  switch (msg.type) {
    case MsgType::MR1: {
      const auto& b = std::get<Mr1Body>(msg.body);
      dig("req", view(b.request.wire()));
      break;
    }
    case MsgType::MR2: {
      const auto& b = std::get<Mr2Body>(msg.body);
      dig("qit_chain", dv(b.qit_chain));
      dig("sk_material", view(b.sk_material));
      dig("pk", view(b.pk_wire));
      dig("pid_rg", dv(b.pid_rg));
      break;
    }
    case MsgType::M1: {
      const auto& b = std::get<M1Body>(msg.body);
      dig("r_i", view(b.r_i));
      dig("token_blob", view(b.token_blob.wire()));
      dig("pk", view(b.pk_wire));
      stamp("t1", b.t1);
      break;
    }
    case MsgType::M2: {
      const auto& b = std::get<M2Body>(msg.body);
      dig("r_i", view(b.r_i));
      dig("envelope", view(b.envelope.wire()));
      stamp("t2", b.t2);
      break;
    }
    case MsgType::M3: {
      const auto& b = std::get<M3Body>(msg.body);
      dig("f", view(b.f));
      dig("skv", dv(b.skv));
      stamp("t3", b.t3);
      break;
    }
    case MsgType::M4: {
      const auto& b = std::get<M4Body>(msg.body);
      dig("skv", dv(b.skv));
      dig("f", view(b.f));
      stamp("t3", b.t3);
      stamp("t4", b.t4);
      dig("gw_tag", dv(b.gw_tag));
      break;
    }
  }
  return out;
}

}  // namespace qsafev
