#pragma once

#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "coopsdn/agents.hpp"
#include "coopsdn/controller.hpp"
#include "coopsdn/errors.hpp"
#include "coopsdn/flow_switch.hpp"
#include "coopsdn/topology.hpp"

namespace coopsdn {

struct Scenario {
  Topology topology;
  LatencyProfile profile;
  DetectorConfig detector;
  std::set<std::uint16_t> protected_ports{22};
  AttackSchedule attack;
  TimeUs registration_start_us = ms_to_us(200);
  TimeUs forward_timeout_us = 0;
  TimeUs time_limit_us = ms_to_us(60000);
  bool tamper_alert_passcode = false;  // inject a wrong passcode into alerts

  void validate() const {
    topology.validate();
    profile.validate();
    if (detector.threshold_k < 1)
      throw ConfigError("detector.threshold_k must be >= 1");
    if (detector.window_us <= 0)
      throw ConfigError("detector.window_ms must be > 0");
    attack.validate();
    int attackers = 0;
    for (const auto& h : topology.hosts)
      if (h.is_attacker) ++attackers;
    if (attackers != 1) throw ConfigError("topology needs exactly one attacker");
    const HostSpec* atk = nullptr;
    for (const auto& h : topology.hosts)
      if (h.is_attacker) atk = &h;
    if (atk->ip != attack.attacker_ip)
      throw ConfigError("attack.attacker_ip does not match the attacker host");
    for (const auto& t : attack.targets) {
      const HostSpec* v = topology.find_host(t.victim_ip);
      if (!v || v->is_attacker)
        throw ConfigError("attack.targets: unknown victim ip " +
                          t.victim_ip.to_string());
    }
    if (registration_start_us < 0) throw ConfigError("registration_start_ms < 0");
  }
};

struct MetricRecord {
  std::string name;  // alert_time, flow_install_time, sharing_time,
                     // total_time_net1, total_time_net2
  int trial = 0;
  TimeUs value_us = 0;
};

inline std::string format_ms(TimeUs us) {
  std::string sign = us < 0 ? "-" : "";
  if (us < 0) us = -us;
  if (us % 1000 == 0) return sign + std::to_string(us / 1000);
  std::string frac = std::to_string(us % 1000);
  while (frac.size() < 3) frac = "0" + frac;
  return sign + std::to_string(us / 1000) + "." + frac;
}

struct RunResult {
  std::string trace;
  std::vector<MetricRecord> metrics;

  // structured observations for property scans
  struct Delivery { TimeUs at; std::string sw; PortId port; IpAddress src, dst; };
  struct PktIn { TimeUs at; std::string ctrl; IpAddress src; bool control; };
  struct DropApplied { TimeUs at; std::string sw; IpAddress src; };
  struct ShareAccepted { TimeUs at; std::string ctrl; };
  struct HostRecv { TimeUs at; std::string host; IpAddress src; };
  std::vector<Delivery> deliveries;
  std::vector<PktIn> packet_ins;
  std::vector<DropApplied> drops_applied;
  std::vector<ShareAccepted> shares_accepted;
  std::vector<HostRecv> host_recvs;
};

// Deterministic discrete-event engine over the topology: FIFO links with
// per-link one-way latency, per-node processing delays, a single virtual
// clock and a line trace of every send/deliver/install/drop.
class Simulation {
  struct EvSwitchDeliver { std::string sw; Packet p; PortId ingress; };
  struct EvHostDeliver { std::string host; Packet p; };
  struct EvPacketIn { std::string ctrl; std::string sw; Packet p; PortId ingress; };
  struct EvPeerDeliver { std::string ctrl; WireMessage msg; };
  struct EvInstallApply { std::string sw; FlowEntry entry; };
  struct EvInstallConfirm { std::string ctrl; std::string sw; FlowEntry entry; };
  struct EvExpiryCheck { std::string sw; };
  struct EvFlowRemovedMsg { std::string ctrl; std::string sw; FlowRemoved fr; };
  struct EvVictimSend { std::string host; WireMessage msg; };
  struct EvEchoReply { std::string ctrl; };

  using Payload =
      std::variant<EvSwitchDeliver, EvHostDeliver, EvPacketIn, EvPeerDeliver,
                   EvInstallApply, EvInstallConfirm, EvExpiryCheck,
                   EvFlowRemovedMsg, EvVictimSend, EvEchoReply>;

  struct Event {
    TimeUs at;
    std::uint64_t seq;
    Payload payload;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

 public:
  Simulation(Scenario scenario, std::uint64_t seed)
      : sc_(std::move(scenario)), seed_(seed) {
    sc_.validate();
    init_nodes();
  }

  RunResult run(int trial = 0) {
    connect_all();
    schedule_registration();
    schedule_attack();
    drain();
    compute_metrics(trial);
    return std::move(result_);
  }

  // Hard-timeout measurement of the flow-installation time: issues a probe
  // flow, waits for its FlowRemoved, and subtracts the timeout and the
  // controller-switch trip time in each direction (obtained from an echo
  // round trip). Returns exactly the switch's install delay.
  TimeUs measure_install_time(const std::string& controller_id,
                              const std::string& switch_id,
                              TimeUs hard_timeout_us) {
    if (hard_timeout_us <= 0) throw ConfigError("hard_timeout must be > 0");
    const SwitchSpec* sw = sc_.topology.find_switch(switch_id);
    if (!sw || sw->controller_id != controller_id)
      throw ConfigError("switch " + switch_id + " is not operated by " +
                        controller_id);
    connect_all();

    TimeUs link = ctrl_switch_latency(controller_id, switch_id);
    // echo: controller -> switch -> controller, no install processing
    schedule(2 * link, EvEchoReply{controller_id});

    FlowEntry probe;
    probe.match.src_ip = *IpAddress::parse("203.0.113.1");
    probe.action = ActionDrop{};
    probe.priority = 150;
    probe.hard_timeout_us = hard_timeout_us;
    probe.cookie = kProbeCookie;
    trace(0, controller_id, "PROBE_ISSUED", probe.describe());
    schedule(link + sc_.profile.switch_install_us,
             EvInstallApply{switch_id, probe});

    drain();
    if (!echo_reply_at_ || !probe_removed_at_ ||
        *probe_removed_at_ - (2 * link + sc_.profile.switch_install_us) >
            10 * hard_timeout_us)
      throw ProbeLost();
    TimeUs round_trip = *probe_removed_at_;
    TimeUs single_trip = *echo_reply_at_ / 2;
    return round_trip - hard_timeout_us - 2 * single_trip;
  }

 private:
  static constexpr std::uint64_t kProbeCookie = 0xffffffffffffffffULL;

  void init_nodes() {
    const auto& topo = sc_.topology;
    for (const auto& c : topo.controllers) {
      Controller ctl(c.id, c.ip, mix_seed(c.id));
      ctl.set_forward_timeout_us(sc_.forward_timeout_us);
      for (const auto& p : topo.peerings) {
        if (p.a == c.id) {
          ctl.add_peer(p.b, PeerInfo{topo.find_controller(p.b)->ip, p.shared_secret});
        } else if (p.b == c.id) {
          ctl.add_peer(p.a, PeerInfo{topo.find_controller(p.a)->ip, p.shared_secret});
        }
      }
      for (const auto& h : topo.hosts) {
        for (const auto& att : h.attach) {
          const SwitchSpec* sw = topo.find_switch(att.switch_id);
          if (sw->controller_id == c.id)
            ctl.add_host(h.ip, HostInfo{h.mac, att.switch_id, att.port});
        }
      }
      controllers_.emplace(c.id, std::move(ctl));
    }
    for (const auto& s : topo.switches)
      switches_.emplace(s.id, FlowSwitch(s.id));
    for (const auto& h : topo.hosts) {
      if (h.is_attacker) continue;
      const std::string& sw = h.attach.front().switch_id;
      IpAddress ctrl_ip =
          topo.find_controller(topo.find_switch(sw)->controller_id)->ip;
      victims_.emplace(
          h.id, VictimAgent(h.id, h.ip, ctrl_ip, sc_.detector,
                            sc_.protected_ports, h.detector_enabled));
    }
  }

  std::uint64_t mix_seed(const std::string& node_id) const {
    std::uint64_t h = seed_ ^ 0x9e3779b97f4a7c15ULL;
    for (char c : node_id) h = (h ^ static_cast<std::uint64_t>(c)) * 0x100000001b3ULL;
    return h;
  }

  void connect_all() {
    for (const auto& s : sc_.topology.switches) {
      // the switch resets to a miss-only table at the connect instant,
      // then the controller's own miss-flow command replaces it in place
      switches_.at(s.id).on_controller_connect(0, 0);
      trace(0, s.id, "CONNECTED", s.controller_id);
      auto fx = controllers_.at(s.controller_id).on_switch_connect(s.id);
      trace(0, s.controller_id, "SWITCH_CONNECT", s.id);
      apply_controller_effects(s.controller_id, fx, 0);
    }
  }

  void schedule_registration() {
    for (const auto& h : sc_.topology.hosts) {
      if (h.is_attacker) continue;
      auto& v = victims_.at(h.id);
      WireMessage reg = v.victim_register(sc_.registration_start_us);
      schedule(sc_.registration_start_us, EvVictimSend{h.id, reg});
    }
  }

  void schedule_attack() {
    const HostSpec* atk = nullptr;
    for (const auto& h : sc_.topology.hosts)
      if (h.is_attacker) atk = &h;
    for (const auto& sp : attacker_run(sc_.attack)) {
      const HostSpec* victim = sc_.topology.find_host(sp.packet.dst_ip);
      std::string sw = atk->attach.front().switch_id;
      for (const auto& att : atk->attach) {
        if (victim && att.switch_id == victim->attach.front().switch_id)
          sw = att.switch_id;
      }
      Packet p = sp.packet;
      p.src_mac = atk->mac;
      if (victim) p.dst_mac = victim->mac;
      trace(sp.at_us, atk->id, "ATTACK_SEND",
            p.dst_ip.to_string() + ":" + std::to_string(p.dst_port) + " via " + sw);
      schedule(sp.at_us + host_switch_latency(atk->id, sw),
               EvSwitchDeliver{sw, p, attach_port(*atk, sw)});
    }
  }

  // --- latency resolution ---------------------------------------------

  TimeUs host_switch_latency(const std::string& host, const std::string& sw) const {
    return sc_.topology.link_latency(host, sw, sc_.profile.link_us);
  }
  TimeUs ctrl_switch_latency(const std::string& ctrl, const std::string& sw) const {
    return sc_.topology.link_latency(ctrl, sw, sc_.profile.link_us);
  }
  TimeUs peer_latency(const std::string& a, const std::string& b) const {
    return sc_.topology.link_latency(a, b, sc_.profile.peer_share_us);
  }

  static PortId attach_port(const HostSpec& h, const std::string& sw) {
    for (const auto& a : h.attach)
      if (a.switch_id == sw) return a.port;
    return h.attach.front().port;
  }

  const HostSpec* host_at(const std::string& sw, PortId port) const {
    for (const auto& h : sc_.topology.hosts)
      for (const auto& a : h.attach)
        if (a.switch_id == sw && a.port == port) return &h;
    return nullptr;
  }

  const std::string& controller_of(const std::string& sw) const {
    return sc_.topology.find_switch(sw)->controller_id;
  }

  // --- event machinery -------------------------------------------------

  void schedule(TimeUs at, Payload payload) {
    queue_.push(Event{at, next_seq_++, std::move(payload)});
  }

  void drain() {
    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      if (ev.at > sc_.time_limit_us) throw TimeLimitExceeded();
      now_ = ev.at;
      std::visit([&](auto& e) { handle(e); }, ev.payload);
    }
  }

  void handle(EvSwitchDeliver& ev) {
    auto& sw = switches_.at(ev.sw);
    for (auto& fx : sw.process_packet(ev.p, ev.ingress, now_)) {
      if (auto* d = std::get_if<EffectDeliver>(&fx)) {
        trace(now_, ev.sw, "DELIVER",
              "port=" + std::to_string(d->port) + " " + flow_of(d->packet));
        result_.deliveries.push_back(
            {now_, ev.sw, d->port, d->packet.src_ip, d->packet.dst_ip});
        if (const HostSpec* h = host_at(ev.sw, d->port)) {
          schedule(now_ + host_switch_latency(h->id, ev.sw),
                   EvHostDeliver{h->id, d->packet});
        }
      } else if (auto* pi = std::get_if<EffectPacketIn>(&fx)) {
        const std::string& ctrl = controller_of(ev.sw);
        schedule(now_ + ctrl_switch_latency(ctrl, ev.sw),
                 EvPacketIn{ctrl, ev.sw, pi->packet, pi->ingress});
      } else {
        auto& dr = std::get<EffectDropped>(fx);
        trace(now_, ev.sw, "DROPPED", flow_of(dr.packet));
      }
    }
  }

  void handle(EvPacketIn& ev) {
    const WireMessage* msg = ev.p.control();
    trace(now_, ev.ctrl, "PACKET_IN",
          "from=" + ev.sw + " " + flow_of(ev.p) +
              (msg ? std::string(" ") + to_string(msg->msg_type) : ""));
    result_.packet_ins.push_back({now_, ev.ctrl, ev.p.src_ip, msg != nullptr});
    if (msg && msg->msg_type == MsgType::kAlert) {
      trace(now_, ev.ctrl, "ALERT_RECEIVED",
            "attacker=" + (msg->attacker_ip ? msg->attacker_ip->to_string() : "?"));
      if (!alert_rx_.count(ev.ctrl)) alert_rx_[ev.ctrl] = now_;
    }
    auto fx = controllers_.at(ev.ctrl).on_packet_in(ev.p, ev.sw, now_);
    apply_controller_effects(ev.ctrl, fx, now_ + sc_.profile.controller_handle_us);
  }

  void handle(EvPeerDeliver& ev) {
    trace(now_, ev.ctrl, "SHARE_RECEIVED",
          "from=" + ev.msg.sender_ip.to_string());
    auto fx = controllers_.at(ev.ctrl).on_peer_message(ev.msg, now_);
    bool rejected = false;
    for (const auto& f : fx) {
      if (auto* log = std::get_if<FxLog>(&f))
        if (log->what.rfind("UNVERIFIED_PEER", 0) == 0) rejected = true;
    }
    if (rejected) {
      trace(now_, ev.ctrl, "SHARE_REJECTED", "");
    } else {
      trace(now_, ev.ctrl, "SHARE_ACCEPTED",
            "attacker=" + ev.msg.attacker_ip->to_string());
      result_.shares_accepted.push_back({now_, ev.ctrl});
      if (!share_accept_.count(ev.ctrl)) share_accept_[ev.ctrl] = now_;
    }
    apply_controller_effects(ev.ctrl, fx, now_ + sc_.profile.controller_handle_us);
  }

  void handle(EvInstallApply& ev) {
    auto& sw = switches_.at(ev.sw);
    FlowEntry entry = ev.entry;
    sw.install_flow(entry, now_);
    trace(now_, ev.sw, "INSTALL_APPLIED", entry.describe());
    if (entry.priority == kPriorityDrop && entry.match.src_ip) {
      result_.drops_applied.push_back({now_, ev.sw, *entry.match.src_ip});
      if (!drop_apply_.count(ev.sw)) drop_apply_[ev.sw] = now_;
    }
    if (entry.expires()) schedule(now_ + entry.hard_timeout_us, EvExpiryCheck{ev.sw});
    const std::string& ctrl = controller_of(ev.sw);
    schedule(now_ + ctrl_switch_latency(ctrl, ev.sw),
             EvInstallConfirm{ctrl, ev.sw, entry});
  }

  void handle(EvInstallConfirm& ev) {
    trace(now_, ev.ctrl, "INSTALL_CONFIRMED", ev.sw + " " + ev.entry.describe());
    if (ev.entry.priority == kPriorityDrop && !drop_confirm_.count(ev.ctrl))
      drop_confirm_[ev.ctrl] = now_;
  }

  void handle(EvExpiryCheck& ev) {
    auto& sw = switches_.at(ev.sw);
    for (const auto& fr : sw.expire_flows(now_)) {
      trace(fr.at_us, ev.sw, "FLOW_EXPIRED", fr.entry.describe());
      const std::string& ctrl = controller_of(ev.sw);
      schedule(now_ + ctrl_switch_latency(ctrl, ev.sw),
               EvFlowRemovedMsg{ctrl, ev.sw, fr});
    }
  }

  void handle(EvFlowRemovedMsg& ev) {
    trace(now_, ev.ctrl, "FLOW_REMOVED", ev.sw + " " + ev.fr.entry.describe());
    if (ev.fr.entry.cookie == kProbeCookie && !probe_removed_at_)
      probe_removed_at_ = now_;
  }

  void handle(EvHostDeliver& ev) {
    const HostSpec* h = sc_.topology.find_host(ev.host);
    if (h->is_attacker) return;
    auto& victim = victims_.at(ev.host);
    if (const WireMessage* msg = ev.p.control()) {
      if (msg->msg_type == MsgType::kRegisterAck) {
        victim.on_register_ack(*msg);
        trace(now_, ev.host, "REGISTERED", "");
      }
      return;
    }
    if (ev.p.is_arp()) return;
    trace(now_, ev.host, "RECV", flow_of(ev.p));
    result_.host_recvs.push_back({now_, ev.host, ev.p.src_ip});
    int suppressed_before = victim.suppressed_alerts();
    auto alert = victim.victim_on_packet(ev.p, now_);
    if (victim.suppressed_alerts() > suppressed_before)
      trace(now_, ev.host, "ALERT_SUPPRESSED", "NOT_REGISTERED");
    if (alert) {
      trace(now_, ev.host, "DETECT", "attacker=" + alert->attacker_ip->to_string());
      if (!detect_.count(ev.host)) detect_[ev.host] = now_;
      WireMessage out = *alert;
      if (sc_.tamper_alert_passcode) out.passcode = *out.passcode ^ 0xdeadULL;
      schedule(now_ + sc_.profile.victim_detect_us, EvVictimSend{ev.host, out});
    }
  }

  void handle(EvVictimSend& ev) {
    const HostSpec* h = sc_.topology.find_host(ev.host);
    const std::string& sw = h->attach.front().switch_id;
    IpAddress ctrl_ip =
        sc_.topology.find_controller(controller_of(sw))->ip;
    trace(now_, ev.host, "SEND", std::string(to_string(ev.msg.msg_type)));
    Packet p;
    p.src_ip = h->ip;
    p.dst_ip = ctrl_ip;
    p.src_mac = h->mac;
    p.src_port = ev.msg.sender_port;
    p.dst_port = kControlPort;
    p.kind = ControlPayload{ev.msg};
    schedule(now_ + host_switch_latency(ev.host, sw),
             EvSwitchDeliver{sw, p, h->attach.front().port});
  }

  void handle(EvEchoReply& ev) {
    trace(now_, ev.ctrl, "ECHO_REPLY", "");
    if (!echo_reply_at_) echo_reply_at_ = now_;
  }

  void apply_controller_effects(const std::string& ctrl,
                                const std::vector<ControllerEffect>& fx,
                                TimeUs t_issue) {
    for (const auto& f : fx) {
      if (auto* inst = std::get_if<FxInstallFlow>(&f)) {
        trace(t_issue, ctrl, "INSTALL_ISSUED", inst->switch_id + " " + inst->entry.describe());
        if (inst->entry.priority == kPriorityDrop && !drop_issue_.count(ctrl))
          drop_issue_[ctrl] = t_issue;
        schedule(t_issue + ctrl_switch_latency(ctrl, inst->switch_id) +
                     sc_.profile.switch_install_us,
                 EvInstallApply{inst->switch_id, inst->entry});
      } else if (auto* out = std::get_if<FxInjectPacket>(&f)) {
        trace(t_issue, ctrl, "PACKET_OUT",
              out->switch_id + " port=" + std::to_string(out->out_port) + " " +
                  flow_of(out->packet));
        if (const HostSpec* h = host_at(out->switch_id, out->out_port)) {
          schedule(t_issue + ctrl_switch_latency(ctrl, out->switch_id) +
                       host_switch_latency(h->id, out->switch_id),
                   EvHostDeliver{h->id, out->packet});
        }
      } else if (auto* share = std::get_if<FxSendToPeer>(&f)) {
        trace(t_issue, ctrl, "SHARE_SENT", "to=" + share->peer_id);
        if (!share_send_.count(ctrl)) share_send_[ctrl] = t_issue;
        schedule(t_issue + peer_latency(ctrl, share->peer_id),
                 EvPeerDeliver{share->peer_id, share->msg});
      } else {
        trace(t_issue, ctrl, "LOG", std::get<FxLog>(f).what);
      }
    }
  }

  // --- reporting -------------------------------------------------------

  static std::string flow_of(const Packet& p) {
    return p.src_ip.to_string() + "->" + p.dst_ip.to_string() + ":" +
           std::to_string(p.dst_port);
  }

  void trace(TimeUs at, const std::string& node, const char* kind,
             const std::string& details) {
    result_.trace += std::to_string(at) + " " + node + " " + kind;
    if (!details.empty()) result_.trace += " " + details;
    result_.trace += "\n";
  }

  void compute_metrics(int trial) {
    // net1 = the network of the first detector-enabled victim
    const HostSpec* alerting = nullptr;
    for (const auto& h : sc_.topology.hosts)
      if (!h.is_attacker && h.detector_enabled && !alerting) alerting = &h;
    if (!alerting || !detect_.count(alerting->id)) return;
    TimeUs t_detect = detect_.at(alerting->id);

    const std::string& sw1 = alerting->attach.front().switch_id;
    const std::string& c1 = controller_of(sw1);
    auto push = [&](const std::string& name, TimeUs v) {
      result_.metrics.push_back(MetricRecord{name, trial, v});
    };

    if (alert_rx_.count(c1)) push("alert_time", alert_rx_.at(c1) - t_detect);
    if (drop_issue_.count(c1) && drop_apply_.count(sw1)) {
      push("flow_install_time", drop_apply_.at(sw1) - drop_issue_.at(c1) -
                                    ctrl_switch_latency(c1, sw1));
    }
    if (drop_confirm_.count(c1))
      push("total_time_net1", drop_confirm_.at(c1) - t_detect);

    std::string c2;
    for (const auto& p : sc_.topology.peerings) {
      if (p.a == c1) c2 = p.b;
      if (p.b == c1) c2 = p.a;
    }
    if (!c2.empty()) {
      if (share_send_.count(c1) && share_accept_.count(c2))
        push("sharing_time", share_accept_.at(c2) - share_send_.at(c1));
      if (drop_confirm_.count(c2))
        push("total_time_net2", drop_confirm_.at(c2) - t_detect);
    }
  }

  Scenario sc_;
  std::uint64_t seed_;
  std::map<std::string, Controller> controllers_;
  std::map<std::string, FlowSwitch> switches_;
  std::map<std::string, VictimAgent> victims_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  TimeUs now_ = 0;
  RunResult result_;

  // first-occurrence instants used by the metric definitions
  std::map<std::string, TimeUs> detect_, alert_rx_, drop_issue_, drop_apply_,
      drop_confirm_, share_send_, share_accept_;
  std::optional<TimeUs> echo_reply_at_, probe_removed_at_;
};

}  // namespace coopsdn
