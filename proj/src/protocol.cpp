#include "protocol.hpp"

namespace qsafev {

const LwePublicKey& SystemBundle::ta_pk() const {
  if (!parsed_) parsed_ = std::make_shared<LwePublicKey>(LwePublicKey::from_wire(view(ta_pk_wire)));
  return *parsed_;
}

void ProtocolParams::validate() const {
  if (delta_t_ms <= 0) throw ParamError("freshness window must be positive");
  if (qit_length < kMinTokenLength) throw ParamError("token length must be at least 64");
  if (epsilon <= 0.0 || epsilon >= 0.5) throw ParamError("epsilon must lie in (0, 0.5)");
  if (login_lock_threshold < 1) throw ParamError("login lock threshold must be positive");
  if (skv_compare_bits < 1 || skv_compare_bits > kDigestLen * 8)
    throw ParamError("validator comparison width out of range");
  lwe.validate();
}

std::map<std::string, Bytes> AvCredentials::stored_tuple() const {
  return {
      {"A", digest_bytes(stored_a)},
      {"QIT_chain", digest_bytes(token.chain_value)},
      {"n_i", nonce_n},
      {"pid_link", digest_bytes(pid_link)},
      {"sk", keypair.sec.wire()},
  };
}

TrustedAuthority TrustedAuthority::initialize(const ProtocolParams& params, std::uint64_t seed) {
  params.validate();
  TrustedAuthority ta;
  ta.params_ = params;
  Rng kr(derive_seed(seed, "qsafev.ta.kappa"));
  ta.kappa_ = kr.bytes(32);
  ta.keypair_ = lwe_keygen(params.lwe, derive_seed(seed, "qsafev.ta.key"));
  ta.bundle_.ta_pk_wire = ta.keypair_.pub.wire();
  ta.bundle_.hash_id = "SHA3-256";
  ta.bundle_.qit_format = "BB84/" + std::to_string(params.qit_length);
  ta.bundle_.protocol_id = "QSAFE-V/1.0";
  return ta;
}

RgCredentials TrustedAuthority::register_gateway(ByteView rid, Rng& rng) {
  Bytes rid_b(rid.begin(), rid.end());
  if (registered_rids_.contains(rid_b)) throw DuplicateIdentityError("identity already registered");
  registered_rids_.insert(rid_b);
  RgCredentials creds;
  creds.rid = rid_b;
  creds.pid = hash_concat({rid, view(kappa_)});
  creds.keypair = lwe_keygen(params_.lwe, rng.u64());
  gateway_pids_.push_back(creds.pid);
  return creds;
}

VenCredentials TrustedAuthority::register_edge_node(ByteView rid, Rng& rng) {
  if (gateway_pids_.empty()) throw DependencyError("no registered gateway");
  Bytes rid_b(rid.begin(), rid.end());
  if (registered_rids_.contains(rid_b)) throw DuplicateIdentityError("identity already registered");
  registered_rids_.insert(rid_b);
  VenCredentials creds;
  creds.rid = rid_b;
  creds.pid = hash_concat({rid, view(kappa_)});
  creds.keypair = lwe_keygen(params_.lwe, rng.u64());
  creds.gw_hash = hash_concat({dv(gateway_pids_.front())});
  creds.challenge_c = rng.bytes(32);
  return creds;
}

namespace {

HashDigest mr2_check(const Mr2Body& b) {
  return hash_concat(
      {view("QSAFEV.MR2"), dv(b.qit_chain), view(b.sk_material), view(b.pk_wire), dv(b.pid_rg)});
}

}  // namespace

Outcome<TrustedAuthority::Mr2Issue> TrustedAuthority::process_mr1(const Ciphertext& mr1,
                                                                  Rng& rng) {
  Bytes rid;
  try {
    rid = pke_decrypt(keypair_.sec, mr1);
  } catch (const TagError&) {
    return Outcome<Mr2Issue>::rejected(RejectReason::Tag, "undecryptable registration request");
  } catch (const CodecError&) {
    return Outcome<Mr2Issue>::rejected(RejectReason::Codec, "malformed registration request");
  }
  if (rid.empty())
    return Outcome<Mr2Issue>::rejected(RejectReason::Codec, "empty identity in request");
  if (registered_rids_.contains(rid))
    throw DuplicateIdentityError("identity already registered");
  if (gateway_pids_.empty()) throw DependencyError("no registered gateway");
  registered_rids_.insert(rid);

  Mr2Issue issue;
  issue.device = registry_.issue(view(kappa_), view(rid), params_.qit_length, rng);
  issue.token_id = issue.device.token_id;
  LweKeyPair kp = lwe_keygen(params_.lwe, rng.u64());
  av_pk_digests_.insert(kp.pub.digest());
  pk_store_[kp.pub.digest()] = kp.pub.wire();

  // The token itself transfers out of band (entangled-pair issuance); the
  // classical response carries only a one-way binding of its chain value.
  issue.mr2.qit_chain =
      hash_concat({view("QSAFEV.MR2.TOKEN"), dv(issue.device.chain_value)});
  issue.mr2.sk_material = kp.sec.wire();
  issue.mr2.pk_wire = kp.pub.wire();
  issue.mr2.pid_rg = gateway_pids_.front();
  issue.mr2.check = mr2_check(issue.mr2);
  return Outcome<Mr2Issue>::success(std::move(issue));
}

void TrustedAuthority::bind_vehicle(const Bytes& token_id, const HashDigest& session_pid) {
  hashed_pid_index_[hash_concat({dv(session_pid)})] = token_id;
}

HashDigest TrustedAuthority::registry_pid(ByteView rid) const {
  return hash_concat({rid, view(kappa_)});
}

const HashDigest& TrustedAuthority::primary_gateway_pid() const {
  if (gateway_pids_.empty()) throw DependencyError("no registered gateway");
  return gateway_pids_.front();
}

bool TrustedAuthority::known_av_pk(const HashDigest& digest) const {
  return av_pk_digests_.contains(digest);
}

const Bytes* TrustedAuthority::pk_wire_by_digest(const HashDigest& digest) const {
  auto it = pk_store_.find(digest);
  return it == pk_store_.end() ? nullptr : &it->second;
}

const Bytes* TrustedAuthority::token_for_hashed_pid(const HashDigest& hashed_pid) const {
  auto it = hashed_pid_index_.find(hashed_pid);
  return it == hashed_pid_index_.end() ? nullptr : &it->second;
}

std::vector<std::pair<HashDigest, std::pair<HashDigest, std::uint64_t>>>
TrustedAuthority::verifier_cache() const {
  std::vector<std::pair<HashDigest, std::pair<HashDigest, std::uint64_t>>> rows;
  rows.reserve(hashed_pid_index_.size());
  for (const auto& [hashed_pid, token_id] : hashed_pid_index_) {
    const TokenRecord& rec = registry_.record(token_id);
    rows.emplace_back(hashed_pid, std::make_pair(rec.chain_current, rec.chain_index));
  }
  return rows;
}

Ciphertext av_build_mr1(const SystemBundle& bundle, ByteView rid, Rng& rng) {
  return pke_encrypt(bundle.ta_pk(), rid, rng);
}

Outcome<AvCredentials> av_process_mr2(ByteView rid, ByteView pw, const Mr2Body& mr2,
                                      QitState device, Rng& rng) {
  if (mr2_check(mr2) != mr2.check)
    return Outcome<AvCredentials>::rejected(RejectReason::Tag,
                                            "registration response failed delivery check");
  LweKeyPair kp;
  try {
    kp.sec = LweSecretKey::from_wire(view(mr2.sk_material));
    kp.pub = LwePublicKey::from_wire(view(mr2.pk_wire));
  } catch (const Error&) {
    return Outcome<AvCredentials>::rejected(RejectReason::Codec,
                                            "registration response key material malformed");
  }
  if (!keypair_consistent(kp.pub, kp.sec))
    return Outcome<AvCredentials>::rejected(RejectReason::Codec,
                                            "registration key pair inconsistent");
  if (hash_concat({view("QSAFEV.MR2.TOKEN"), dv(device.chain_value)}) != mr2.qit_chain)
    return Outcome<AvCredentials>::rejected(RejectReason::TokenAuth,
                                            "token binding does not match issued device");

  AvCredentials creds;
  creds.rid.assign(rid.begin(), rid.end());
  creds.nonce_n = rng.bytes(32);
  creds.stored_a = to_digest(view(xor_bytes(dv(hash_concat({rid, pw})), view(creds.nonce_n))));
  creds.pid = hash_concat({rid, view(creds.nonce_n)});
  creds.pid_link = xor_digests(mr2.pid_rg, creds.pid);
  creds.keypair = std::move(kp);
  creds.token = std::move(device);
  return Outcome<AvCredentials>::success(std::move(creds));
}

VehicleRegistration register_vehicle(TrustedAuthority& ta, const std::string& av_entity_id,
                                     ByteView rid, ByteView pw, Rng& rng,
                                     const std::function<void(Bytes&)>& mr2_fault) {
  VehicleRegistration out;

  ProtocolMessage mr1_msg{MsgType::MR1, av_entity_id, "TA", Timestamp{0},
                          Mr1Body{av_build_mr1(ta.bundle(), rid, rng)}};
  Bytes mr1_bytes = encode_message(mr1_msg);
  ProtocolMessage mr1_delivered;
  try {
    mr1_delivered = decode_message(view(mr1_bytes));
  } catch (const CodecError& e) {
    out.reason = RejectReason::Codec;
    out.detail = e.what();
    return out;
  }
  out.transcript.push_back(mr1_delivered);

  auto issued = ta.process_mr1(std::get<Mr1Body>(mr1_delivered.body).request, rng);
  if (!issued.ok()) {
    out.reason = issued.reason;
    out.detail = issued.detail;
    return out;
  }
  out.token_id = issued->token_id;

  ProtocolMessage mr2_msg{MsgType::MR2, "TA", av_entity_id, Timestamp{0}, issued->mr2};
  Bytes mr2_bytes = encode_message(mr2_msg);
  if (mr2_fault) mr2_fault(mr2_bytes);
  ProtocolMessage mr2_delivered;
  try {
    mr2_delivered = decode_message(view(mr2_bytes));
  } catch (const CodecError& e) {
    out.reason = RejectReason::Codec;
    out.detail = e.what();
    return out;
  }
  if (mr2_delivered.type != MsgType::MR2) {
    out.reason = RejectReason::Codec;
    out.detail = "unexpected registration response variant";
    return out;
  }
  out.transcript.push_back(mr2_delivered);

  auto creds = av_process_mr2(rid, pw, std::get<Mr2Body>(mr2_delivered.body),
                              std::move(issued->device), rng);
  if (!creds.ok()) {
    out.reason = creds.reason;
    out.detail = creds.detail;
    return out;
  }
  ta.bind_vehicle(out.token_id, creds->pid);
  out.creds = std::move(*creds.value);
  out.ok = true;
  return out;
}

Outcome<std::monostate> av_login(AvCredentials& creds, ByteView rid_input, ByteView pw_input,
                                 const ProtocolParams& params) {
  using Out = Outcome<std::monostate>;
  if (creds.locked) return Out::rejected(RejectReason::Login, "onboard terminal locked");
  Bytes n = xor_bytes(dv(creds.stored_a), dv(hash_concat({rid_input, pw_input})));
  if (n != creds.nonce_n) {
    if (++creds.consecutive_failures >= params.login_lock_threshold) creds.locked = true;
    return Out::rejected(RejectReason::Login, "stored registration value mismatch");
  }
  creds.consecutive_failures = 0;
  creds.logged_in = true;
  return Out::success({});
}

HashDigest derive_sid(const Bytes& r_i, const HashDigest& token_blob_digest, Timestamp t1,
                      const Bytes& f, const HashDigest& skv, Timestamp t3) {
  return hash_concat({view(r_i), dv(token_blob_digest), view(ts_bytes(t1)), view(f), dv(skv),
                      view(ts_bytes(t3))});
}

bool truncated_equal(const HashDigest& a, const HashDigest& b, std::size_t bits) {
  if (bits >= kDigestLen * 8) return a == b;
  std::size_t whole = bits / 8;
  for (std::size_t i = 0; i < whole; ++i)
    if (a[i] != b[i]) return false;
  std::size_t rem = bits % 8;
  if (rem == 0) return true;
  std::uint8_t mask = static_cast<std::uint8_t>(0xFF << (8 - rem));
  return (a[whole] & mask) == (b[whole] & mask);
}

M1Start av_build_m1(const AvCredentials& creds, const LwePublicKey& ven_pk, Timestamp now,
                    Rng& rng) {
  if (!creds.logged_in || creds.locked) throw StateError("vehicle is not logged in");
  M1Start start;
  SessionRecord& s = start.session;
  s.role = Role::Vehicle;
  s.started = now;
  s.t1 = now;
  s.r_i = rng.bytes(32);
  s.token_chain_used = creds.token.chain_value;
  s.s_i = hash_concat({view(s.r_i), dv(creds.token.chain_value), dv(creds.pid),
                       view(ts_bytes(s.t1))});

  ByteWriter pt;
  pt.raw(dv(creds.token.chain_value));
  pt.raw(dv(creds.pid));
  pt.ts(s.t1);
  start.m1.token_blob = pke_encrypt(ven_pk, view(pt.data()), rng);
  start.m1.r_i = s.r_i;
  start.m1.pk_wire = creds.keypair.pub.wire();
  start.m1.t1 = s.t1;
  s.token_blob_digest = sha3_256(view(start.m1.token_blob.wire()));
  return start;
}

Outcome<M2Body> rg_process_m1(const RgCredentials& creds, RgRuntime& rt, const M1Body& m1,
                              const std::string& av_id, Timestamp now, const RegistryView& view_,
                              const LwePublicKey& ven_pk, Rng& rng,
                              const ProtocolParams& params) {
  using Out = Outcome<M2Body>;
  if (!freshness_ok(now, m1.t1, params.delta_t_ms))
    return Out::rejected(RejectReason::Freshness, "t1 outside the freshness window");
  if (rt.seen_r.contains(m1.r_i))
    return Out::rejected(RejectReason::Replay, "session nonce already seen");
  if (!view_.known_av_pk(sha3_256(view(m1.pk_wire))))
    return Out::rejected(RejectReason::UnknownKey, "public key not in registry");
  rt.seen_r.insert(m1.r_i);

  M2Body m2;
  m2.t2 = now;
  m2.r_i = m1.r_i;
  HashDigest d = xor_digests(
      creds.pid, hash_concat({view(m1.r_i), view(m1.pk_wire), view(ts_bytes(m2.t2))}));

  ByteWriter pt;
  pt.raw(dv(d));
  pt.field(view(m1.token_blob.wire()));
  pt.field(view(m1.pk_wire));
  pt.ts(m1.t1);
  pt.ts(m2.t2);
  m2.envelope = pke_encrypt(ven_pk, view(pt.data()), rng);

  rt.pending.push_back(RgPending{m1.r_i, av_id});
  return Out::success(std::move(m2));
}

Outcome<VenAccept> ven_process_m2(const VenCredentials& creds, VenRuntime& rt, const M2Body& m2,
                                  RegistryView& registry, Timestamp now, Rng& rng,
                                  const ProtocolParams& params) {
  using Out = Outcome<VenAccept>;
  if (!freshness_ok(now, m2.t2, params.delta_t_ms))
    return Out::rejected(RejectReason::Freshness, "t2 outside the freshness window");

  Bytes plain;
  try {
    plain = pke_decrypt(creds.keypair.sec, m2.envelope);
  } catch (const TagError&) {
    return Out::rejected(RejectReason::Tag, "gateway envelope integrity failure");
  } catch (const CodecError&) {
    return Out::rejected(RejectReason::Codec, "gateway envelope malformed");
  }

  HashDigest d{};
  Bytes blob_wire, pk_wire;
  Timestamp t1{}, t2_inner{};
  try {
    ByteReader r(view(plain));
    d = to_digest(view(r.raw(kDigestLen)));
    blob_wire = r.field();
    pk_wire = r.field();
    t1 = r.ts();
    t2_inner = r.ts();
    r.expect_end();
  } catch (const Error&) {
    return Out::rejected(RejectReason::Codec, "gateway envelope contents malformed");
  }
  if (t2_inner != m2.t2)
    return Out::rejected(RejectReason::GatewayAuth, "t2 does not match envelope");

  HashDigest pid_rg = xor_digests(
      d, hash_concat({view(m2.r_i), view(pk_wire), view(ts_bytes(m2.t2))}));
  if (hash_concat({dv(pid_rg)}) != creds.gw_hash)
    return Out::rejected(RejectReason::GatewayAuth, "gateway pseudo-identity mismatch");

  if (rt.seen_r.contains(m2.r_i))
    return Out::rejected(RejectReason::Replay, "session nonce already seen");
  if (!registry.known_av_pk(sha3_256(view(pk_wire))))
    return Out::rejected(RejectReason::UnknownKey, "public key not in registry");
  rt.seen_r.insert(m2.r_i);

  Bytes blob_plain;
  Ciphertext blob;
  try {
    blob = Ciphertext::from_wire(view(blob_wire));
    blob_plain = pke_decrypt(creds.keypair.sec, blob);
  } catch (const TagError&) {
    return Out::rejected(RejectReason::TokenAuth, "token blob integrity failure");
  } catch (const CodecError&) {
    return Out::rejected(RejectReason::Codec, "token blob malformed");
  }

  HashDigest chain{}, pid{};
  Timestamp t1_av{};
  try {
    ByteReader r(view(blob_plain));
    chain = to_digest(view(r.raw(kDigestLen)));
    pid = to_digest(view(r.raw(kDigestLen)));
    t1_av = r.ts();
    r.expect_end();
  } catch (const Error&) {
    return Out::rejected(RejectReason::Codec, "token blob contents malformed");
  }
  if (t1_av != t1)
    return Out::rejected(RejectReason::GatewayAuth, "t1 does not match forwarded value");

  const Bytes* token_id = registry.token_for_hashed_pid(hash_concat({dv(pid)}));
  if (token_id == nullptr)
    return Out::rejected(RejectReason::TokenAuth, "unknown pseudo-identity");
  ChainMatch match = registry.match_chain(*token_id, chain);
  if (match == ChainMatch::Mismatch)
    return Out::rejected(RejectReason::TokenAuth, "token chain stale or unknown");

  VenAccept acc;
  SessionRecord& s = acc.record;
  s.role = Role::EdgeNode;
  s.started = now;
  s.r_i = m2.r_i;
  s.t1 = t1;
  s.t2 = m2.t2;
  s.t3 = now;
  s.token_chain_used = chain;
  s.token_blob_digest = sha3_256(view(blob_wire));
  s.s_i = hash_concat({view(m2.r_i), dv(chain), dv(pid), view(ts_bytes(t1))});
  s.r_j = rng.bytes(32);
  s.session_key = hash_concat(
      {view(xor_bytes(dv(s.s_i), view(s.r_j))), view(ts_bytes(s.t3))});
  s.skv = hash_concat({dv(s.session_key), view(ts_bytes(s.t3))});

  acc.m3.f = xor_bytes(view(s.r_j), dv(hash_concat({dv(pid), view(ts_bytes(s.t3))})));
  acc.m3.skv = s.skv;
  acc.m3.t3 = s.t3;

  registry.advance_chain(*token_id, match, s.skv, s.t3);

  s.sid = derive_sid(s.r_i, s.token_blob_digest, s.t1, acc.m3.f, s.skv, s.t3);
  s.status = SessionStatus::Accepted;
  s.finished = now;
  return Out::success(std::move(acc));
}

Outcome<M4Forward> rg_forward_m3(const RgCredentials& creds, RgRuntime& rt, const M3Body& m3,
                                 Timestamp now) {
  using Out = Outcome<M4Forward>;
  if (rt.pending.empty())
    return Out::rejected(RejectReason::State, "no pending session to forward");
  M4Forward fwd;
  fwd.av_id = rt.pending.front().av_id;
  rt.pending.pop_front();
  fwd.m4.skv = m3.skv;
  fwd.m4.f = m3.f;
  fwd.m4.t3 = m3.t3;
  fwd.m4.t4 = now;
  fwd.m4.gw_tag = hash_concat({dv(creds.pid), dv(m3.skv), view(m3.f), view(ts_bytes(m3.t3)),
                               view(ts_bytes(fwd.m4.t4))});
  return Out::success(std::move(fwd));
}

Outcome<std::monostate> av_finalize(AvCredentials& creds, SessionRecord& session,
                                    const M4Body& m4, Timestamp now,
                                    const ProtocolParams& params) {
  using Out = Outcome<std::monostate>;
  if (session.status != SessionStatus::Running)
    throw StateError("session is not in the running state");
  auto fail = [&](RejectReason r, const char* d) {
    session.status = SessionStatus::Rejected;
    session.reason = r;
    session.detail = d;
    session.finished = now;
    return Out::rejected(r, d);
  };

  if (!freshness_ok(m4.t4, m4.t3, params.delta_t_ms))
    return fail(RejectReason::Freshness, "t3 to t4 gap outside the freshness window");
  if (!freshness_ok(now, m4.t4, params.delta_t_ms))
    return fail(RejectReason::Freshness, "t4 outside the freshness window");
  if (m4.f.size() != kDigestLen) return fail(RejectReason::Codec, "bad mask length");

  HashDigest pid_rg = xor_digests(creds.pid_link, creds.pid);
  HashDigest expected_tag = hash_concat(
      {dv(pid_rg), dv(m4.skv), view(m4.f), view(ts_bytes(m4.t3)), view(ts_bytes(m4.t4))});
  if (expected_tag != m4.gw_tag)
    return fail(RejectReason::GatewayAuth, "gateway forward tag mismatch");

  Bytes r_j = xor_bytes(view(m4.f), dv(hash_concat({dv(creds.pid), view(ts_bytes(m4.t3))})));
  HashDigest sk = hash_concat(
      {view(xor_bytes(dv(session.s_i), view(r_j))), view(ts_bytes(m4.t3))});
  HashDigest skv = hash_concat({dv(sk), view(ts_bytes(m4.t3))});
  if (!truncated_equal(skv, m4.skv, params.skv_compare_bits))
    return fail(RejectReason::KeyConfirm, "session key validator mismatch");

  session.r_j = std::move(r_j);
  session.session_key = sk;
  session.skv = skv;
  session.t3 = m4.t3;
  session.t4 = m4.t4;
  session.sid = derive_sid(session.r_i, session.token_blob_digest, session.t1, m4.f, m4.skv,
                           m4.t3);
  qit_update(creds.token, skv, m4.t3);
  session.status = SessionStatus::Accepted;
  session.finished = now;
  return Out::success({});
}

}  // namespace qsafev
