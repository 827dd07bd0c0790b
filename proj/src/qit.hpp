#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "bytes.hpp"
#include "hash.hpp"
#include "rng.hpp"

namespace qsafev {

inline constexpr std::size_t kMinTokenLength = 64;

// Quantum identity token, simulated as secret basis/value state with
// measurement statistics. The secret arrays never leave the issuing record
// and the holder's device; only chain_value travels in protocol messages.
struct QitState {
  Bytes token_id;
  std::vector<std::uint8_t> secret_bases;   // one 0/1 entry per position
  std::vector<std::uint8_t> secret_values;
  HashDigest chain_value{};
  std::uint64_t chain_index = 0;
  HashDigest prev_chain_value{};

  std::size_t length() const { return secret_bases.size(); }
};

struct QitChallenge {
  std::vector<std::uint8_t> bases;
  std::array<std::uint8_t, 16> nonce{};
};

struct QitResponse {
  std::vector<std::uint8_t> bits;
};

struct QitVerdict {
  bool accepted = false;
  double mismatch_rate = 1.0;
  std::size_t matched = 0;
};

// Fresh token: uniform secret state, chain anchored to the issuer secret and
// the holder identity. ParamError when length < 64.
QitState qit_issue(ByteView ta_secret, ByteView entity_id, std::size_t length, Rng&);

QitChallenge qit_make_challenge(std::size_t length, Rng&);

// Basis-matched positions return the secret value flipped with probability
// noise_p; mismatched positions measure uniformly at random.
QitResponse qit_respond(const QitState&, const QitChallenge&, double noise_p, Rng&);

// Compares only positions where the challenge basis matches the issuing
// record's basis; accepts iff the mismatch fraction is at most epsilon.
QitVerdict qit_verify(const QitState& expected, const QitChallenge&, const QitResponse&,
                      double epsilon);

// Best-effort forgery from observed exchanges: per-position majority vote
// over challenge bases and response bits. InsufficientDataError when empty.
QitState qit_clone_attempt(std::span<const QitChallenge> challenges,
                           std::span<const QitResponse> responses);

// Chain step after an accepted session: hash(old || skv || t).
void qit_update(QitState&, const HashDigest& skv, Timestamp t);

enum class ChainMatch { Current, Previous, Mismatch };

// Issuer-side record of one token. chain_current/chain_prev track the value
// the verifier expects; `issued` keeps the secret state for challenge checks.
struct TokenRecord {
  QitState issued;
  HashDigest chain_current{};
  HashDigest chain_prev{};
  std::uint64_t chain_index = 0;
};

// The trusted authority's token book. Verifiers work against a distributed
// snapshot of it; a presented chain value may match the current entry or,
// for desynchronization recovery, the immediately previous one.
class TokenRegistry {
 public:
  // Issues a token, stores the record, and returns the holder's device copy.
  QitState issue(ByteView ta_secret, ByteView entity_id, std::size_t length, Rng&);

  const TokenRecord& record(const Bytes& token_id) const;  // UnknownTokenError
  bool contains(const Bytes& token_id) const;

  ChainMatch match_chain(const Bytes& token_id, const HashDigest& presented) const;

  // Moves the record forward after an accepted session. A Previous match
  // re-synchronizes: the new current value is derived from the value the
  // holder actually presented.
  void advance(const Bytes& token_id, ChainMatch matched, const HashDigest& skv, Timestamp t);

  QitVerdict verify_response(const Bytes& token_id, const QitChallenge&, const QitResponse&,
                             double epsilon) const;

  // Public snapshot rows (token id, chain value, chain index); secrets are
  // not exportable.
  std::vector<std::pair<std::string, std::pair<std::string, std::uint64_t>>> snapshot() const;

 private:
  std::map<Bytes, TokenRecord> records_;
};

}  // namespace qsafev
