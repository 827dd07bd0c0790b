#include "adversary.hpp"

namespace qsafev {

const char* to_string(Capability c) {
  switch (c) {
    case Capability::KA1: return "KA1";
    case Capability::KA2: return "KA2";
    case Capability::KA3: return "KA3";
    case Capability::KA4_1: return "KA4-1";
    case Capability::KA4_2: return "KA4-2";
    case Capability::KA5_1: return "KA5-1";
    case Capability::KA5_2: return "KA5-2";
    case Capability::KA6: return "KA6";
  }
  return "?";
}

std::string to_string(const CapabilitySet& caps) {
  std::string out;
  for (Capability c : caps) {
    if (!out.empty()) out += "+";
    out += to_string(c);
  }
  return out;
}

int attack_path_variants(int goal) {
  switch (goal) {
    case 1:
    case 2:
    case 3:
    case 9: return 2;
    case 4:
    case 6: return 3;
    case 5:
    case 7:
    case 8: return 1;
    default: throw ParamError("unknown security goal SG" + std::to_string(goal));
  }
}

CapabilitySet attack_path(int goal, int variant) {
  using C = Capability;
  if (variant < 1 || variant > attack_path_variants(goal))
    throw ParamError("unknown variant for SG" + std::to_string(goal));
  switch (goal) {
    case 1:
    case 2:
    case 3:
    case 9:
      return variant == 1 ? CapabilitySet{C::KA1, C::KA2, C::KA5_1, C::KA5_2, C::KA6}
                          : CapabilitySet{C::KA1, C::KA3, C::KA5_1, C::KA5_2, C::KA6};
    case 4:
    case 6:
      if (variant == 1) return {C::KA1, C::KA2, C::KA4_1, C::KA4_2, C::KA6};
      if (variant == 2) return {C::KA1, C::KA2, C::KA5_2, C::KA6};
      return {C::KA1, C::KA3, C::KA4_1, C::KA4_2, C::KA6};
    case 5: return {C::KA1, C::KA4_1, C::KA5_1, C::KA5_2, C::KA6};
    case 7: return {C::KA1, C::KA3};
    case 8: return {C::KA1, C::KA2, C::KA3, C::KA5_1, C::KA5_2, C::KA6};
    default: throw ParamError("unknown security goal SG" + std::to_string(goal));
  }
}

Adversary::Adversary(CapabilitySet caps, std::uint64_t seed)
    : caps_(std::move(caps)),
      rng_(derive_seed(seed, "adversary.rng")),
      challenger_rng_(derive_seed(seed, "adversary.challenger")) {}

void Adversary::attach(World& w) {
  w.install_hook(has(Capability::KA1) ? this : nullptr);
}

Adversary::Action Adversary::on_message(ProtocolMessage& msg, Timestamp now) {
  observed_.push_back(msg);
  if (script_) return script_(msg, now);
  return Action::Deliver;
}

std::vector<ProtocolMessage> Adversary::oracle_execute(World& w, const std::string& av_id,
                                                       const std::string& ven_id) {
  if (!has(Capability::KA1)) throw CapabilityError("Execute requires KA1");
  attach(w);
  const std::size_t mark = observed_.size();
  w.run_handshake(av_id, ven_id);
  return std::vector<ProtocolMessage>(observed_.begin() + mark, observed_.end());
}

World::InjectOutcome Adversary::oracle_send(World& w, ProtocolMessage msg) {
  if (!has(Capability::KA1)) throw CapabilityError("Send requires KA1");
  return w.inject(msg);
}

const LeakRecord& Adversary::push_leak(LeakRecord rec) {
  corrupted_.push_back(std::move(rec));
  return corrupted_.back();
}

const LeakRecord& Adversary::oracle_corrupt(World& w, Capability which,
                                            const std::string& target) {
  if (!has(which)) throw CapabilityError(std::string("capability not enabled: ") +
                                         to_string(which));
  LeakRecord rec;
  rec.capability = to_string(which);
  rec.target = target;
  switch (which) {
    case Capability::KA3: {
      // Long-term identity material lives on the vehicle (CK-II scope).
      VehicleEntity* av = nullptr;
      try {
        av = &w.vehicle(target);
      } catch (const RoutingError&) {
        throw RoutingError("KA3 is scoped to vehicle-stored long-term material");
      }
      rec.values["sk"] = av->creds.keypair.sec.wire();
      corruption_cutoff_[target] =
          std::max(corruption_cutoff_[target], av->history.size());
      break;
    }
    case Capability::KA4_1: {
      VehicleEntity& av = w.vehicle(target);
      rec.values = av.creds.stored_tuple();
      corruption_cutoff_[target] = std::max(corruption_cutoff_[target], av.history.size());
      break;
    }
    case Capability::KA4_2: {
      EdgeEntity& ven = w.edge_node(target);
      for (const auto& [hashed_pid, row] : w.authority().verifier_cache()) {
        Bytes v = digest_bytes(row.first);
        Bytes idx = le64(row.second);
        v.insert(v.end(), idx.begin(), idx.end());
        rec.values["map:" + hex(ByteView(hashed_pid.data(), 8))] = std::move(v);
      }
      corruption_cutoff_[target] = std::max(corruption_cutoff_[target], ven.history.size());
      break;
    }
    case Capability::KA5_1: {
      const auto& transcript = w.registration_transcript(target);
      for (const auto& msg : transcript)
        rec.values[to_string(msg.type)] = encode_message(msg);
      break;
    }
    case Capability::KA5_2: {
      GatewayEntity& rg = w.gateway(target);
      rec.values["pid_rg"] = digest_bytes(rg.creds.pid);
      rec.values["sk_rg"] = rg.creds.keypair.sec.wire();
      break;
    }
    case Capability::KA2:
      throw ParamError("KA2 targets a session instance; use the session corruption query");
    default:
      throw ParamError("capability has no corruption semantics");
  }
  return push_leak(std::move(rec));
}

const LeakRecord& Adversary::oracle_corrupt_session(World& w, InstanceRef ref) {
  if (!has(Capability::KA2)) throw CapabilityError("capability not enabled: KA2");
  const SessionRecord& s = session_at(w, ref);
  LeakRecord rec;
  rec.capability = "KA2";
  rec.target = ref.entity + "#" + std::to_string(ref.index);
  rec.values["r_i"] = s.r_i;
  if (!s.r_j.empty()) rec.values["r_j"] = s.r_j;
  rec.values["t1"] = le64(static_cast<std::uint64_t>(s.t1.millis));
  rec.values["t2"] = le64(static_cast<std::uint64_t>(s.t2.millis));
  rec.values["t3"] = le64(static_cast<std::uint64_t>(s.t3.millis));
  rec.values["t4"] = le64(static_cast<std::uint64_t>(s.t4.millis));
  // Ephemeral token hashes: one-way hints of the per-session token value,
  // never the chain value itself.
  rec.values["token_hint"] =
      digest_bytes(hash_concat({view("QSAFEV.KA2.HINT"), dv(s.token_chain_used)}));
  mark_session_unfresh(w, ref);
  return push_leak(std::move(rec));
}

HashDigest Adversary::oracle_reveal(World& w, InstanceRef ref) {
  const SessionRecord& s = session_at(w, ref);
  if (s.status != SessionStatus::Accepted)
    throw StateError("Reveal requires an accepted instance");
  mark_session_unfresh(w, ref);
  return s.session_key;
}

TestChallenge Adversary::oracle_test(World& w, InstanceRef ref) {
  if (test_used_) throw ProtocolError("Test may be issued once per game");
  const SessionRecord& s = session_at(w, ref);
  if (s.status != SessionStatus::Accepted) throw StateError("Test requires an accepted instance");
  if (!is_fresh(w, ref)) throw FreshnessViolation("instance is not fresh");
  test_used_ = true;
  TestChallenge ch;
  ch.hidden_bit = challenger_rng_.bit() ? 1 : 0;
  if (ch.hidden_bit == 1) {
    ch.issued_key = s.session_key;
  } else {
    Bytes r = challenger_rng_.bytes(kDigestLen);
    ch.issued_key = to_digest(view(r));
  }
  return ch;
}

bool Adversary::is_fresh(const World& w, InstanceRef ref) const {
  auto side_fresh = [&](const InstanceRef& r) {
    if (unfresh_.contains(r)) return false;
    auto it = corruption_cutoff_.find(r.entity);
    if (it != corruption_cutoff_.end() && r.index >= it->second) return false;
    return true;
  };
  if (!side_fresh(ref)) return false;
  if (auto partner = partner_of(w, ref); partner.has_value() && !side_fresh(*partner))
    return false;
  return true;
}

const SessionRecord& Adversary::session_at(const World& w, const InstanceRef& ref) const {
  const std::vector<SessionRecord>* history = nullptr;
  try {
    history = &w.vehicle(ref.entity).history;
  } catch (const RoutingError&) {
    history = &w.edge_node(ref.entity).history;
  }
  if (ref.index >= history->size()) throw StateError("no such protocol instance");
  return (*history)[ref.index];
}

std::optional<InstanceRef> Adversary::partner_of(const World& w, const InstanceRef& ref) const {
  const SessionRecord& s = session_at(w, ref);
  if (s.status != SessionStatus::Accepted) return std::nullopt;
  auto scan = [&](const std::vector<std::string>& ids,
                  auto&& history_of) -> std::optional<InstanceRef> {
    for (const auto& id : ids) {
      const auto& hist = history_of(id);
      for (std::size_t i = 0; i < hist.size(); ++i)
        if (hist[i].status == SessionStatus::Accepted && hist[i].sid == s.sid)
          return InstanceRef{id, i};
    }
    return std::nullopt;
  };
  if (s.role == Role::Vehicle)
    return scan(w.edge_node_ids(), [&](const std::string& id) -> const auto& {
      return w.edge_node(id).history;
    });
  return scan(w.vehicle_ids(),
              [&](const std::string& id) -> const auto& { return w.vehicle(id).history; });
}

void Adversary::mark_session_unfresh(const World& w, const InstanceRef& ref) {
  unfresh_.insert(ref);
  if (auto partner = partner_of(w, ref); partner.has_value()) unfresh_.insert(*partner);
}

const LeakRecord* Adversary::find_leak(const std::string& capability,
                                       const std::string& key) const {
  for (const auto& rec : corrupted_)
    if (rec.capability == capability && rec.target == key) return &rec;
  return nullptr;
}

bool Adversary::spend_hash_query() {
  if (hash_queries_used >= budgets.hash_queries) return false;
  ++hash_queries_used;
  return true;
}

}  // namespace qsafev
