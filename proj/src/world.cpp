#include "world.hpp"

#include <json.hpp>

namespace qsafev {

using ordered_json = nlohmann::ordered_json;

std::string Trace::jsonl() const {
  std::string out;
  for (const auto& ev : events_) {
    ordered_json j;
    j["t"] = ev.t.millis;
    j["kind"] = ev.kind;
    if (!ev.sender.empty()) j["sender"] = ev.sender;
    if (!ev.receiver.empty()) j["receiver"] = ev.receiver;
    if (!ev.variant.empty()) j["variant"] = ev.variant;
    if (!ev.fields.empty()) {
      ordered_json f;
      for (const auto& [k, v] : ev.fields) f[k] = v;
      j["fields"] = f;
    }
    if (!ev.note.empty()) j["note"] = ev.note;
    out += j.dump();
    out += '\n';
  }
  return out;
}

World::World(WorldConfig cfg)
    : cfg_(std::move(cfg)),
      channel_rng_(derive_seed(cfg_.seed, "world.channel")),
      scenario_rng_(derive_seed(cfg_.seed, "world.scenario")),
      ta_(TrustedAuthority::initialize(cfg_.proto, derive_seed(cfg_.seed, "world.ta"))) {
  trace_.enabled = cfg_.record_trace;
  register_all();
}

void World::register_all() {
  Rng reg_rng(derive_seed(cfg_.seed, "world.registration"));

  for (int i = 0; i < cfg_.n_rg; ++i) {
    GatewayEntity g;
    g.id = "RG-" + std::to_string(i + 1);
    g.rid = Rng(derive_seed(cfg_.seed, "rid.rg", i)).bytes(16);
    g.creds = ta_.register_gateway(view(g.rid), reg_rng);
    trace_.add({now(), "register", g.id, "TA", "", {}, "gateway registered"});
    gateways_.emplace(g.id, std::move(g));
  }

  for (int i = 0; i < cfg_.n_ven; ++i) {
    EdgeEntity e;
    e.id = "VEN-" + std::to_string(i + 1);
    e.rid = Rng(derive_seed(cfg_.seed, "rid.ven", i)).bytes(16);
    e.creds = ta_.register_edge_node(view(e.rid), reg_rng);
    trace_.add({now(), "register", e.id, "TA", "", {}, "edge node registered"});
    edges_.emplace(e.id, std::move(e));
  }

  for (int i = 0; i < cfg_.n_av; ++i) {
    VehicleEntity v;
    v.id = "AV-" + std::to_string(i + 1);
    Rng idr(derive_seed(cfg_.seed, "rid.av", i));
    v.rid = idr.bytes(16);
    v.pw = idr.bytes(12);
    VehicleRegistration reg = register_vehicle(ta_, v.id, view(v.rid), view(v.pw), reg_rng);
    if (!reg.ok) throw StateError("vehicle registration failed during world setup");
    v.creds = std::move(*reg.creds);
    v.token_id = reg.token_id;
    reg_transcripts_[v.id] = reg.transcript;
    // Registration rides the physically secure channel: replay the exchange
    // through the fabric so channel semantics (no adversary visibility)
    // hold for it too.
    for (const auto& msg : reg.transcript) send(cfg_.secure_channel, msg);
    pump();
    auto login = av_login(v.creds, view(v.rid), view(v.pw), cfg_.proto);
    if (!login.ok()) throw StateError("vehicle login failed during world setup");
    vehicles_.emplace(v.id, std::move(v));
  }
}

VehicleEntity& World::vehicle(const std::string& id) {
  auto it = vehicles_.find(id);
  if (it == vehicles_.end()) throw RoutingError("unknown vehicle " + id);
  return it->second;
}
EdgeEntity& World::edge_node(const std::string& id) {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw RoutingError("unknown edge node " + id);
  return it->second;
}
GatewayEntity& World::gateway(const std::string& id) {
  auto it = gateways_.find(id);
  if (it == gateways_.end()) throw RoutingError("unknown gateway " + id);
  return it->second;
}
const VehicleEntity& World::vehicle(const std::string& id) const {
  return const_cast<World*>(this)->vehicle(id);
}
const EdgeEntity& World::edge_node(const std::string& id) const {
  return const_cast<World*>(this)->edge_node(id);
}
const GatewayEntity& World::gateway(const std::string& id) const {
  return const_cast<World*>(this)->gateway(id);
}

std::vector<std::string> World::vehicle_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : vehicles_) out.push_back(id);
  return out;
}
std::vector<std::string> World::edge_node_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : edges_) out.push_back(id);
  return out;
}
std::vector<std::string> World::gateway_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : gateways_) out.push_back(id);
  return out;
}

Timestamp World::clock_of(const std::string& id) const {
  auto it = cfg_.clock_skew_ms.find(id);
  std::int64_t skew = it == cfg_.clock_skew_ms.end() ? 0 : it->second;
  return Timestamp{now().millis + skew};
}

const std::vector<ProtocolMessage>& World::registration_transcript(
    const std::string& av_id) const {
  auto it = reg_transcripts_.find(av_id);
  if (it == reg_transcripts_.end()) throw RoutingError("unknown vehicle " + av_id);
  return it->second;
}

void World::send(const ChannelModel& ch, ProtocolMessage msg) {
  TraceEvent ev{now(), "send", msg.sender, msg.receiver, to_string(msg.type), {}, ""};
  if (trace_.enabled) ev.fields = field_digests(msg);
  SendStatus st = net_.schedule(ch, std::move(msg), channel_rng_, hook_);
  if (st == SendStatus::Dropped) ev.kind = "drop";
  if (st == SendStatus::Intercepted) ev.kind = "intercept";
  trace_.add(std::move(ev));
}

World::HandleResult World::handle(const ProtocolMessage& msg) {
  HandleResult res;
  const Timestamp recv_clock = clock_of(msg.receiver);

  if (msg.type == MsgType::M1 && gateways_.contains(msg.receiver)) {
    GatewayEntity& rg = gateway(msg.receiver);
    if (rg.route_ven.empty() || !edges_.contains(rg.route_ven)) {
      res.reason = RejectReason::Routing;
      res.detail = "gateway has no edge-node route";
      return res;
    }
    EdgeEntity& ven = edge_node(rg.route_ven);
    auto m2 = rg_process_m1(rg.creds, rg.rt, std::get<M1Body>(msg.body), msg.sender, recv_clock,
                            RegistryView(&ta_), ven.creds.keypair.pub, scenario_rng_, cfg_.proto);
    if (!m2.ok()) {
      res.reason = m2.reason;
      res.detail = m2.detail;
      return res;
    }
    res.accepted = true;
    res.next = ProtocolMessage{MsgType::M2, rg.id, ven.id, recv_clock, std::move(*m2.value)};
    return res;
  }

  if (msg.type == MsgType::M2 && edges_.contains(msg.receiver)) {
    EdgeEntity& ven = edge_node(msg.receiver);
    RegistryView reg(&ta_);
    auto acc = ven_process_m2(ven.creds, ven.rt, std::get<M2Body>(msg.body), reg, recv_clock,
                              scenario_rng_, cfg_.proto);
    if (!acc.ok()) {
      res.reason = acc.reason;
      res.detail = acc.detail;
      return res;
    }
    acc->record.self_id = ven.id;
    ven.history.push_back(acc->record);
    res.accepted = true;
    res.next = ProtocolMessage{MsgType::M3, ven.id, msg.sender, recv_clock, std::move(acc->m3)};
    return res;
  }

  if (msg.type == MsgType::M3 && gateways_.contains(msg.receiver)) {
    GatewayEntity& rg = gateway(msg.receiver);
    auto fwd = rg_forward_m3(rg.creds, rg.rt, std::get<M3Body>(msg.body), recv_clock);
    if (!fwd.ok()) {
      res.reason = fwd.reason;
      res.detail = fwd.detail;
      return res;
    }
    res.accepted = true;
    res.next =
        ProtocolMessage{MsgType::M4, rg.id, fwd->av_id, recv_clock, std::move(fwd->m4)};
    return res;
  }

  if (msg.type == MsgType::M4 && vehicles_.contains(msg.receiver)) {
    VehicleEntity& av = vehicle(msg.receiver);
    if (!av.current.has_value() || av.current->status != SessionStatus::Running) {
      res.reason = RejectReason::State;
      res.detail = "no running session at the vehicle";
      return res;
    }
    auto fin =
        av_finalize(av.creds, *av.current, std::get<M4Body>(msg.body), recv_clock, cfg_.proto);
    if (!fin.ok()) {
      res.reason = fin.reason;
      res.detail = fin.detail;
      return res;
    }
    res.accepted = true;
    return res;
  }

  if (msg.type == MsgType::MR1 && msg.receiver == "TA") {
    // Registration exchanges are replayed through the secure channel during
    // setup; the cryptographic processing already happened.
    res.accepted = true;
    return res;
  }
  if (msg.type == MsgType::MR2 && vehicles_.contains(msg.receiver)) {
    res.accepted = true;
    return res;
  }

  res.reason = RejectReason::Routing;
  res.detail = "no handler for " + std::string(to_string(msg.type)) + " at " + msg.receiver;
  return res;
}

void World::pump() {
  while (auto delivery = net_.advance()) {
    const ProtocolMessage& msg = delivery->msg;
    trace_.add({now(), "deliver", msg.sender, msg.receiver, to_string(msg.type), {}, ""});
    HandleResult res = handle(msg);
    if (res.reason != RejectReason::None) {
      last_reject_ = res.reason;
      last_reject_detail_ = res.detail;
      trace_.add({now(), "reject", msg.receiver, "", to_string(msg.type), {},
                  std::string(to_string(res.reason)) + ": " + res.detail});
      continue;
    }
    if (res.next.has_value()) send(cfg_.public_channel, std::move(*res.next));
  }
}

HandshakeResult World::run_handshake(const std::string& av_id, const std::string& ven_id) {
  VehicleEntity& av = vehicle(av_id);
  EdgeEntity& ven = edge_node(ven_id);
  if (gateways_.empty()) throw DependencyError("no gateway available");
  GatewayEntity& rg = gateway(gateway_ids().front());
  rg.route_ven = ven_id;

  if (!av.creds.logged_in) throw StateError("vehicle must be logged in");

  last_reject_ = RejectReason::None;
  last_reject_detail_.clear();
  const std::size_t ven_history_before = ven.history.size();
  const Timestamp start = now();

  M1Start m1 = av_build_m1(av.creds, ven.creds.keypair.pub, clock_of(av_id), scenario_rng_);
  m1.session.self_id = av_id;
  av.current = std::move(m1.session);
  send(cfg_.public_channel,
       ProtocolMessage{MsgType::M1, av_id, rg.id, clock_of(av_id), std::move(m1.m1)});
  pump();

  HandshakeResult result;
  if (av.current.has_value()) {
    if (av.current->status == SessionStatus::Running) {
      av.current->status = SessionStatus::Rejected;
      av.current->reason = RejectReason::Timeout;
      av.current->detail = "no confirmation before the channel went idle";
      av.current->finished = now();
      trace_.add({now(), "timeout", av_id, "", "", {}, "session timed out"});
    } else if (av.current->status == SessionStatus::Accepted) {
      trace_.add({now(), "accept", av_id, "", "", {}, "mutual authentication complete"});
    }
    result.av_record = *av.current;
    av.history.push_back(*av.current);
    av.current.reset();
  }

  if (ven.history.size() > ven_history_before) result.ven_record = ven.history.back();
  result.mutual_accept = result.av_record.status == SessionStatus::Accepted &&
                         result.ven_record.has_value() &&
                         result.ven_record->status == SessionStatus::Accepted;
  if (!result.mutual_accept) {
    result.failure = result.av_record.reason != RejectReason::None ? result.av_record.reason
                                                                   : last_reject_;
    result.failure_detail = !result.av_record.detail.empty() ? result.av_record.detail
                                                             : last_reject_detail_;
  }
  result.elapsed_ms = now().millis - start.millis;
  return result;
}

World::InjectOutcome World::inject(const ProtocolMessage& msg) {
  trace_.add({now(), "inject", msg.sender, msg.receiver, to_string(msg.type), {}, ""});
  InjectOutcome out;
  bool known = vehicles_.contains(msg.receiver) || edges_.contains(msg.receiver) ||
               gateways_.contains(msg.receiver) || msg.receiver == "TA";
  if (!known) {
    out.reason = RejectReason::Routing;
    out.detail = "unknown endpoint " + msg.receiver;
    return out;
  }
  HandleResult res = handle(msg);
  out.accepted = res.accepted;
  out.reason = res.reason;
  out.detail = res.detail;
  out.response = std::move(res.next);
  if (out.reason != RejectReason::None)
    trace_.add({now(), "reject", msg.receiver, "", to_string(msg.type), {},
                std::string(to_string(out.reason)) + ": " + out.detail});
  return out;
}

std::string World::snapshot_json() const {
  ordered_json j;
  const SystemBundle& b = ta_.bundle();
  j["protocol"] = {{"id", b.protocol_id},
                   {"hash", b.hash_id},
                   {"qit_format", b.qit_format},
                   {"ta_pk", short_digest(view(b.ta_pk_wire))}};
  ordered_json ents;
  ents["vehicles"] = vehicle_ids();
  ents["edge_nodes"] = edge_node_ids();
  ents["gateways"] = gateway_ids();
  j["entities"] = ents;
  ordered_json reg = ordered_json::array();
  for (const auto& [id, row] : ta_.registry().snapshot()) {
    ordered_json r;
    r["token_id"] = id;
    r["chain_value"] = row.first;
    r["chain_index"] = row.second;
    reg.push_back(r);
  }
  j["token_registry"] = reg;
  j["seed"] = cfg_.seed;
  return j.dump(2);
}

}  // namespace qsafev
