#include "qit.hpp"

#include "errors.hpp"

namespace qsafev {

QitState qit_issue(ByteView ta_secret, ByteView entity_id, std::size_t length, Rng& rng) {
  if (length < kMinTokenLength)
    throw ParamError("token length must be at least " + std::to_string(kMinTokenLength));
  QitState st;
  st.secret_bases.resize(length);
  st.secret_values.resize(length);
  for (auto& b : st.secret_bases) b = rng.bit() ? 1 : 0;
  for (auto& v : st.secret_values) v = rng.bit() ? 1 : 0;
  st.chain_value = hash_concat({ta_secret, entity_id, view(st.secret_values)});
  st.prev_chain_value = st.chain_value;
  st.chain_index = 0;
  st.token_id = rng.bytes(16);
  return st;
}

QitChallenge qit_make_challenge(std::size_t length, Rng& rng) {
  QitChallenge ch;
  ch.bases.resize(length);
  for (auto& b : ch.bases) b = rng.bit() ? 1 : 0;
  Bytes nonce = rng.bytes(ch.nonce.size());
  std::copy(nonce.begin(), nonce.end(), ch.nonce.begin());
  return ch;
}

QitResponse qit_respond(const QitState& st, const QitChallenge& ch, double noise_p, Rng& rng) {
  if (noise_p < 0.0 || noise_p > 0.5) throw ParamError("noise probability must be in [0, 0.5]");
  if (ch.bases.size() != st.length())
    throw LengthError("challenge length does not match token length");
  QitResponse resp;
  resp.bits.resize(st.length());
  for (std::size_t i = 0; i < st.length(); ++i) {
    if (ch.bases[i] == st.secret_bases[i]) {
      bool flip = noise_p > 0.0 && rng.chance(noise_p);
      resp.bits[i] = st.secret_values[i] ^ (flip ? 1 : 0);
    } else {
      resp.bits[i] = rng.bit() ? 1 : 0;
    }
  }
  return resp;
}

QitVerdict qit_verify(const QitState& expected, const QitChallenge& ch, const QitResponse& resp,
                      double epsilon) {
  if (ch.bases.size() != expected.length() || resp.bits.size() != expected.length())
    throw LengthError("challenge/response length does not match token length");
  std::size_t matched = 0, mismatches = 0;
  for (std::size_t i = 0; i < expected.length(); ++i) {
    if (ch.bases[i] != expected.secret_bases[i]) continue;
    ++matched;
    if (resp.bits[i] != expected.secret_values[i]) ++mismatches;
  }
  QitVerdict v;
  v.matched = matched;
  if (matched == 0) {
    v.mismatch_rate = 1.0;
    v.accepted = false;
    return v;
  }
  v.mismatch_rate = static_cast<double>(mismatches) / static_cast<double>(matched);
  v.accepted = v.mismatch_rate <= epsilon;
  return v;
}

QitState qit_clone_attempt(std::span<const QitChallenge> challenges,
                           std::span<const QitResponse> responses) {
  if (challenges.empty() || responses.empty() || challenges.size() != responses.size())
    throw InsufficientDataError("clone attempt requires observed challenge/response pairs");
  const std::size_t len = challenges[0].bases.size();
  for (std::size_t k = 0; k < challenges.size(); ++k)
    if (challenges[k].bases.size() != len || responses[k].bits.size() != len)
      throw LengthError("observed exchanges have inconsistent lengths");

  QitState forged;
  forged.token_id = to_bytes("forged");
  forged.secret_bases.resize(len);
  forged.secret_values.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    int basis_votes = 0, value_votes = 0;
    for (std::size_t k = 0; k < challenges.size(); ++k) {
      basis_votes += challenges[k].bases[i] ? 1 : -1;
      value_votes += responses[k].bits[i] ? 1 : -1;
    }
    forged.secret_bases[i] = basis_votes > 0    ? 1
                             : basis_votes < 0 ? 0
                                               : challenges[0].bases[i];
    forged.secret_values[i] = value_votes > 0    ? 1
                              : value_votes < 0 ? 0
                                                : responses[0].bits[i];
  }
  return forged;
}

void qit_update(QitState& st, const HashDigest& skv, Timestamp t) {
  st.prev_chain_value = st.chain_value;
  st.chain_value = hash_concat({dv(st.chain_value), dv(skv), view(ts_bytes(t))});
  ++st.chain_index;
}

QitState TokenRegistry::issue(ByteView ta_secret, ByteView entity_id, std::size_t length,
                              Rng& rng) {
  QitState device = qit_issue(ta_secret, entity_id, length, rng);
  TokenRecord rec;
  rec.issued = device;
  rec.chain_current = device.chain_value;
  rec.chain_prev = device.chain_value;
  rec.chain_index = 0;
  records_[device.token_id] = std::move(rec);
  return device;
}

const TokenRecord& TokenRegistry::record(const Bytes& token_id) const {
  auto it = records_.find(token_id);
  if (it == records_.end()) throw UnknownTokenError("token id not in registry");
  return it->second;
}

bool TokenRegistry::contains(const Bytes& token_id) const {
  return records_.contains(token_id);
}

ChainMatch TokenRegistry::match_chain(const Bytes& token_id, const HashDigest& presented) const {
  const TokenRecord& rec = record(token_id);
  if (presented == rec.chain_current) return ChainMatch::Current;
  if (presented == rec.chain_prev && rec.chain_index > 0) return ChainMatch::Previous;
  return ChainMatch::Mismatch;
}

void TokenRegistry::advance(const Bytes& token_id, ChainMatch matched, const HashDigest& skv,
                            Timestamp t) {
  auto it = records_.find(token_id);
  if (it == records_.end()) throw UnknownTokenError("token id not in registry");
  TokenRecord& rec = it->second;
  switch (matched) {
    case ChainMatch::Current:
      rec.chain_prev = rec.chain_current;
      rec.chain_current = hash_concat({dv(rec.chain_current), dv(skv), view(ts_bytes(t))});
      ++rec.chain_index;
      break;
    case ChainMatch::Previous:
      // Holder fell one step behind; rebuild the expected next value from
      // the value it still holds. Depth stays the same.
      rec.chain_current = hash_concat({dv(rec.chain_prev), dv(skv), view(ts_bytes(t))});
      break;
    case ChainMatch::Mismatch:
      throw StateError("cannot advance a mismatched chain");
  }
}

QitVerdict TokenRegistry::verify_response(const Bytes& token_id, const QitChallenge& ch,
                                          const QitResponse& resp, double epsilon) const {
  return qit_verify(record(token_id).issued, ch, resp, epsilon);
}

std::vector<std::pair<std::string, std::pair<std::string, std::uint64_t>>>
TokenRegistry::snapshot() const {
  std::vector<std::pair<std::string, std::pair<std::string, std::uint64_t>>> rows;
  rows.reserve(records_.size());
  for (const auto& [id, rec] : records_)
    rows.emplace_back(hex(view(id)),
                      std::make_pair(hex(dv(rec.chain_current)), rec.chain_index));
  return rows;
}

}  // namespace qsafev
