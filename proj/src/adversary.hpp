#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "world.hpp"

namespace qsafev {

enum class Capability { KA1, KA2, KA3, KA4_1, KA4_2, KA5_1, KA5_2, KA6 };

using CapabilitySet = std::set<Capability>;

const char* to_string(Capability);
std::string to_string(const CapabilitySet&);

// Capability sets for each security goal, expanded from the goal/attack
// table. A '/' in the table denotes alternative variants, and bare KA4/KA5
// cover both of their sub-capabilities.
CapabilitySet attack_path(int goal, int variant = 1);  // ParamError
int attack_path_variants(int goal);

struct InstanceRef {
  std::string entity;
  std::size_t index = 0;  // position in that entity's session history
  friend auto operator<=>(const InstanceRef&, const InstanceRef&) = default;
};

struct LeakRecord {
  std::string capability;
  std::string target;
  std::map<std::string, Bytes> values;
};

struct TestChallenge {
  int hidden_bit = 0;
  HashDigest issued_key{};
};

struct AdversaryBudgets {
  std::uint64_t hash_queries = 1ull << 20;  // q_h
  std::uint64_t guesses = 1ull << 20;       // offline budget; KA6 scales this
};

// The extended-ROR adversary: channel interposition, corruption oracles,
// reveal/test, and bookkeeping for session freshness and query budgets.
class Adversary : public AdversaryHook {
 public:
  Adversary(CapabilitySet caps, std::uint64_t seed);

  const CapabilitySet& capabilities() const { return caps_; }
  bool has(Capability c) const { return caps_.contains(c); }

  // Installs the channel hook (requires KA1 for any visibility).
  void attach(World&);

  // AdversaryHook: records public-channel traffic, then applies the scripted
  // interference, if any.
  Action on_message(ProtocolMessage&, Timestamp now) override;

  using Script = std::function<Action(ProtocolMessage&, Timestamp)>;
  void set_script(Script s) { script_ = std::move(s); }
  void clear_script() { script_ = nullptr; }

  const std::vector<ProtocolMessage>& observed() const { return observed_; }

  // --- oracle queries -------------------------------------------------------

  // Passive copy of one honest run's public exchange. CapabilityError
  // without KA1.
  std::vector<ProtocolMessage> oracle_execute(World&, const std::string& av_id,
                                              const std::string& ven_id);

  // Active injection: deliver a (possibly modified or replayed) message now.
  World::InjectOutcome oracle_send(World&, ProtocolMessage msg);

  // Long-term/stored-material corruption. KA3 targets vehicles (long-term
  // identity material lives on the vehicle); RoutingError otherwise.
  const LeakRecord& oracle_corrupt(World&, Capability which, const std::string& target);

  // KA2: per-instance ephemeral leak (nonces, timestamps, token hint).
  // Marks the instance and its partner unfresh.
  const LeakRecord& oracle_corrupt_session(World&, InstanceRef);

  // Session-key reveal; marks the instance and its partner unfresh.
  HashDigest oracle_reveal(World&, InstanceRef);  // StateError if not accepted

  // Real-or-random challenge; single use per game.
  TestChallenge oracle_test(World&, InstanceRef);

  bool is_fresh(const World&, InstanceRef) const;

  const std::vector<LeakRecord>& corrupted_material() const { return corrupted_; }
  const LeakRecord* find_leak(const std::string& capability, const std::string& key) const;

  AdversaryBudgets budgets;
  std::uint64_t hash_queries_used = 0;
  bool spend_hash_query();

  Rng& rng() { return rng_; }

 private:
  const SessionRecord& session_at(const World&, const InstanceRef&) const;
  std::optional<InstanceRef> partner_of(const World&, const InstanceRef&) const;
  void mark_session_unfresh(const World&, const InstanceRef&);
  const LeakRecord& push_leak(LeakRecord rec);

  CapabilitySet caps_;
  Rng rng_;
  Rng challenger_rng_;
  Script script_;
  std::vector<ProtocolMessage> observed_;
  std::vector<LeakRecord> corrupted_;
  std::set<InstanceRef> unfresh_;
  // Node-corruption cutoffs: sessions an entity completes after the cutoff
  // are unfresh (their inputs were exposed at corruption time).
  std::map<std::string, std::size_t> corruption_cutoff_;
  bool test_used_ = false;
};

}  // namespace qsafev
