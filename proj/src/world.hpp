#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "net.hpp"
#include "protocol.hpp"

namespace qsafev {

struct TraceEvent {
  Timestamp t{};
  std::string kind;  // register/send/drop/intercept/deliver/reject/accept/timeout/inject
  std::string sender, receiver, variant;
  std::vector<std::pair<std::string, std::string>> fields;
  std::string note;
};

class Trace {
 public:
  bool enabled = true;
  void add(TraceEvent ev) {
    if (enabled) events_.push_back(std::move(ev));
  }
  const std::vector<TraceEvent>& events() const { return events_; }
  std::string jsonl() const;

 private:
  std::vector<TraceEvent> events_;
};

struct WorldConfig {
  std::uint64_t seed = 1;
  int n_av = 1, n_ven = 1, n_rg = 1;
  ChannelModel public_channel{};
  ChannelModel secure_channel{5.0, 0.0, 0.0, true};
  ProtocolParams proto{};
  std::map<std::string, std::int64_t> clock_skew_ms;
  bool record_trace = true;
};

struct VehicleEntity {
  std::string id;
  Bytes rid, pw;
  AvCredentials creds;
  Bytes token_id;
  std::optional<SessionRecord> current;
  std::vector<SessionRecord> history;
};

struct EdgeEntity {
  std::string id;
  Bytes rid;
  VenCredentials creds;
  VenRuntime rt;
  std::vector<SessionRecord> history;
};

struct GatewayEntity {
  std::string id;
  Bytes rid;
  RgCredentials creds;
  RgRuntime rt;
  std::string route_ven;  // deployment wiring: which edge node this gateway serves
};

struct HandshakeResult {
  bool mutual_accept = false;
  SessionRecord av_record;
  std::optional<SessionRecord> ven_record;
  RejectReason failure = RejectReason::None;
  std::string failure_detail;
  std::int64_t elapsed_ms = 0;
};

// One deterministic scenario instance: a trusted authority, registered
// entities, the event-driven channel fabric, and a trace. Everything a run
// produces is a pure function of the WorldConfig.
class World {
 public:
  explicit World(WorldConfig cfg);

  HandshakeResult run_handshake(const std::string& av_id, const std::string& ven_id);

  struct InjectOutcome {
    std::optional<ProtocolMessage> response;
    bool accepted = false;  // receiver-side acceptance, where applicable
    RejectReason reason = RejectReason::None;
    std::string detail;
  };
  // Delivers a message to its receiver at the current time, bypassing the
  // channel. The response (if any) is handed back instead of being sent.
  InjectOutcome inject(const ProtocolMessage& msg);

  VehicleEntity& vehicle(const std::string& id);
  EdgeEntity& edge_node(const std::string& id);
  GatewayEntity& gateway(const std::string& id);
  const VehicleEntity& vehicle(const std::string& id) const;
  const EdgeEntity& edge_node(const std::string& id) const;
  const GatewayEntity& gateway(const std::string& id) const;

  std::vector<std::string> vehicle_ids() const;
  std::vector<std::string> edge_node_ids() const;
  std::vector<std::string> gateway_ids() const;

  TrustedAuthority& authority() { return ta_; }
  const TrustedAuthority& authority() const { return ta_; }
  RegistryView registry_view() { return RegistryView(&ta_); }

  EventQueue& net() { return net_; }
  Trace& trace() { return trace_; }
  Timestamp now() const { return net_.now(); }
  Timestamp clock_of(const std::string& id) const;

  void install_hook(AdversaryHook* hook) { hook_ = hook; }
  AdversaryHook* hook() const { return hook_; }

  const WorldConfig& config() const { return cfg_; }
  Rng& scenario_rng() { return scenario_rng_; }

  const std::vector<ProtocolMessage>& registration_transcript(const std::string& av_id) const;

  // Deployment snapshot: published parameters, entity roster, public token
  // registry rows. Secrets are not exportable.
  std::string snapshot_json() const;

 private:
  struct HandleResult {
    std::optional<ProtocolMessage> next;
    bool accepted = false;
    RejectReason reason = RejectReason::None;
    std::string detail;
  };
  HandleResult handle(const ProtocolMessage& msg);
  void pump();
  void send(const ChannelModel& ch, ProtocolMessage msg);
  void register_all();

  WorldConfig cfg_;
  Rng channel_rng_;
  Rng scenario_rng_;
  TrustedAuthority ta_;
  std::map<std::string, VehicleEntity> vehicles_;
  std::map<std::string, EdgeEntity> edges_;
  std::map<std::string, GatewayEntity> gateways_;
  std::map<std::string, std::vector<ProtocolMessage>> reg_transcripts_;
  EventQueue net_;
  Trace trace_;
  AdversaryHook* hook_ = nullptr;
  RejectReason last_reject_ = RejectReason::None;
  std::string last_reject_detail_;
};

}  // namespace qsafev
