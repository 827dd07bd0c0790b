#pragma once

#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lwe.hpp"
#include "messages.hpp"
#include "net.hpp"
#include "qit.hpp"

namespace qsafev {

struct ProtocolParams {
  std::int64_t delta_t_ms = 200;   // maximum allowable transmission delay
  std::size_t qit_length = 256;
  double epsilon = 0.11;           // token verification mismatch threshold
  LweParams lwe{};
  int login_lock_threshold = 3;
  // Key-confirmation comparison width; only the MITM tag-length sweep
  // narrows this below the full digest.
  std::size_t skv_compare_bits = kDigestLen * 8;

  void validate() const;  // ParamError
};

// The four system-wide public parameters published after initialization.
struct SystemBundle {
  Bytes ta_pk_wire;
  std::string hash_id;
  std::string qit_format;
  std::string protocol_id;

  // Parsed view of ta_pk_wire, shared so repeated encryptions to the
  // authority reuse one matrix expansion.
  const LwePublicKey& ta_pk() const;

 private:
  mutable std::shared_ptr<LwePublicKey> parsed_;
};

struct RgCredentials {
  Bytes rid;
  HashDigest pid{};
  LweKeyPair keypair;
};

struct VenCredentials {
  Bytes rid;
  HashDigest pid{};
  LweKeyPair keypair;
  HashDigest gw_hash{};  // h(PID_RG)
  Bytes challenge_c;     // C_VEN
};

struct AvCredentials {
  Bytes rid;
  HashDigest pid{};        // h(rid || n_i), used in session flows
  HashDigest stored_a{};   // h(rid || pw) XOR n_i
  Bytes nonce_n;           // 32 octets
  LweKeyPair keypair;
  HashDigest pid_link{};   // pid_rg XOR pid
  QitState token;

  int consecutive_failures = 0;
  bool locked = false;
  bool logged_in = false;

  // The five values Algorithm-style registration leaves in the secure
  // module; also exactly what a vehicle-memory leak exposes.
  std::map<std::string, Bytes> stored_tuple() const;
};

enum class Role { Vehicle, EdgeNode, Gateway };

enum class SessionStatus { Running, Accepted, Rejected };

struct SessionRecord {
  std::string self_id;
  Role role{};
  SessionStatus status = SessionStatus::Running;
  RejectReason reason = RejectReason::None;
  std::string detail;

  HashDigest sid{};
  Bytes r_i, r_j;
  HashDigest s_i{};
  HashDigest session_key{};
  HashDigest skv{};
  Timestamp t1{}, t2{}, t3{}, t4{};
  HashDigest token_chain_used{};
  HashDigest token_blob_digest{};
  Timestamp started{}, finished{};
};

class TrustedAuthority {
 public:
  static TrustedAuthority initialize(const ProtocolParams&, std::uint64_t seed);

  const SystemBundle& bundle() const { return bundle_; }
  const ProtocolParams& params() const { return params_; }
  const LwePublicKey& public_key() const { return keypair_.pub; }
  const LweSecretKey& secret_key() const { return keypair_.sec; }

  RgCredentials register_gateway(ByteView rid, Rng&);     // DuplicateIdentityError
  VenCredentials register_edge_node(ByteView rid, Rng&);  // DependencyError w/o gateway

  struct Mr2Issue {
    Mr2Body mr2;
    QitState device;
    Bytes token_id;
  };
  // Decrypts MR1 and provisions the vehicle. Undecryptable requests reject;
  // a duplicate identity raises DuplicateIdentityError.
  Outcome<Mr2Issue> process_mr1(const Ciphertext& mr1, Rng&);

  // Finalizes vehicle registration: maps the hashed session pseudo-identity
  // to its token so deployed verifiers can resolve presented credentials.
  void bind_vehicle(const Bytes& token_id, const HashDigest& session_pid);

  HashDigest registry_pid(ByteView rid) const;  // h(rid || kappa)
  const HashDigest& primary_gateway_pid() const;

  bool known_av_pk(const HashDigest& digest) const;
  const Bytes* pk_wire_by_digest(const HashDigest& digest) const;
  const Bytes* token_for_hashed_pid(const HashDigest& hashed_pid) const;
  // What a deployed verifier caches: hashed pseudo-identities mapped to
  // current chain values and indices. No raw identities, no secrets.
  std::vector<std::pair<HashDigest, std::pair<HashDigest, std::uint64_t>>> verifier_cache() const;
  TokenRegistry& registry() { return registry_; }
  const TokenRegistry& registry() const { return registry_; }
  ByteView kappa() const { return view(kappa_); }

 private:
  ProtocolParams params_;
  Bytes kappa_;
  LweKeyPair keypair_;
  SystemBundle bundle_;
  TokenRegistry registry_;
  std::set<Bytes> registered_rids_;
  std::vector<HashDigest> gateway_pids_;
  std::set<HashDigest> av_pk_digests_;
  std::map<HashDigest, Bytes> pk_store_;          // digest -> wire form
  std::map<HashDigest, Bytes> hashed_pid_index_;  // h(session pid) -> token id
};

// Read/advance view of the authority's registry, as distributed to deployed
// verifiers. Gateways only consult the key set; edge nodes also resolve and
// advance token chains.
class RegistryView {
 public:
  explicit RegistryView(TrustedAuthority* ta) : ta_(ta) {}
  bool known_av_pk(const HashDigest& d) const { return ta_->known_av_pk(d); }
  const Bytes* pk_wire_by_digest(const HashDigest& d) const { return ta_->pk_wire_by_digest(d); }
  const Bytes* token_for_hashed_pid(const HashDigest& h) const {
    return ta_->token_for_hashed_pid(h);
  }
  ChainMatch match_chain(const Bytes& token_id, const HashDigest& presented) const {
    return ta_->registry().match_chain(token_id, presented);
  }
  void advance_chain(const Bytes& token_id, ChainMatch m, const HashDigest& skv, Timestamp t) {
    ta_->registry().advance(token_id, m, skv, t);
  }
  const TokenRecord& token_record(const Bytes& token_id) const {
    return ta_->registry().record(token_id);
  }

 private:
  TrustedAuthority* ta_;
};

// --- Vehicle-side registration and login -----------------------------------

Ciphertext av_build_mr1(const SystemBundle&, ByteView rid, Rng&);

// Validates the registration response (delivery check, keypair consistency,
// token handoff) and assembles the credential set.
Outcome<AvCredentials> av_process_mr2(ByteView rid, ByteView pw, const Mr2Body&,
                                      QitState device, Rng&);

struct VehicleRegistration {
  bool ok = false;
  RejectReason reason = RejectReason::None;
  std::string detail;
  std::optional<AvCredentials> creds;
  Bytes token_id;
  std::vector<ProtocolMessage> transcript;  // MR1/MR2 as sent on the secure channel
};

// Drives the full MR1/MR2 exchange. `fault` may corrupt encoded messages in
// transit (fault-injection hooks for tests).
VehicleRegistration register_vehicle(TrustedAuthority&, const std::string& av_entity_id,
                                     ByteView rid, ByteView pw, Rng&,
                                     const std::function<void(Bytes&)>& fault = nullptr);

// Recomputes n_i from the stored mask; three consecutive failures lock the
// onboard terminal for the rest of the scenario.
Outcome<std::monostate> av_login(AvCredentials&, ByteView rid_input, ByteView pw_input,
                                 const ProtocolParams&);

// --- Session steps ----------------------------------------------------------

struct M1Start {
  M1Body m1;
  SessionRecord session;
};
// Draws r_i and t1, derives the session secret, and encrypts the token
// credential blob to the edge node. StateError unless logged in.
M1Start av_build_m1(const AvCredentials&, const LwePublicKey& ven_pk, Timestamp now, Rng&);

struct RgPending {
  Bytes r_i;
  std::string av_id;
};
struct RgRuntime {
  std::set<Bytes> seen_r;  // replay cache for session nonces
  std::deque<RgPending> pending;
};

Outcome<M2Body> rg_process_m1(const RgCredentials&, RgRuntime&, const M1Body&,
                              const std::string& av_id, Timestamp now, const RegistryView&,
                              const LwePublicKey& ven_pk, Rng&, const ProtocolParams&);

struct VenRuntime {
  std::set<Bytes> seen_r;
};
struct VenAccept {
  M3Body m3;
  SessionRecord record;
};
Outcome<VenAccept> ven_process_m2(const VenCredentials&, VenRuntime&, const M2Body&,
                                  RegistryView&, Timestamp now, Rng&, const ProtocolParams&);

struct M4Forward {
  M4Body m4;
  std::string av_id;
};
Outcome<M4Forward> rg_forward_m3(const RgCredentials&, RgRuntime&, const M3Body&, Timestamp now);

// Final vehicle-side verification; on acceptance derives the session key,
// checks the validator, and steps the token chain.
Outcome<std::monostate> av_finalize(AvCredentials&, SessionRecord&, const M4Body&, Timestamp now,
                                    const ProtocolParams&);

// First `bits` bits of two digests agree.
bool truncated_equal(const HashDigest& a, const HashDigest& b, std::size_t bits);

// Shared session-identifier derivation over the fields both endpoints see.
HashDigest derive_sid(const Bytes& r_i, const HashDigest& token_blob_digest, Timestamp t1,
                      const Bytes& f, const HashDigest& skv, Timestamp t3);

}  // namespace qsafev
