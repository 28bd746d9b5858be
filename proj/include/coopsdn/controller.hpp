#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "coopsdn/errors.hpp"
#include "coopsdn/flow.hpp"
#include "coopsdn/flow_switch.hpp"
#include "coopsdn/wire.hpp"

namespace coopsdn {

constexpr std::uint16_t kSwitchChannelPort = 6653;
constexpr std::uint16_t kControlPort = 9999;  // peer/victim messages

struct HostInfo {
  MacAddress mac;
  std::string switch_id;
  PortId port = 0;
};

struct PeerInfo {
  IpAddress address;
  std::uint64_t shared_secret = 0;
};

struct Registration {
  std::uint64_t passcode = 0;
  TimeUs registered_at_us = 0;
};

// Effects emitted by the controller; the harness (or a transport adapter)
// turns them into scheduled deliveries.
struct FxInstallFlow { std::string switch_id; FlowEntry entry; };
struct FxInjectPacket { std::string switch_id; PortId out_port; Packet packet; };
struct FxSendToPeer { std::string peer_id; WireMessage msg; };
struct FxLog { std::string what; };

using ControllerEffect =
    std::variant<FxInstallFlow, FxInjectPacket, FxSendToPeer, FxLog>;

// Event-serialized controller state machine: per-switch seen-source
// tables, registration with passcode issuance, trust and evidence checks
// for alerts, ARP answering, reactive forwarding, block list and peer
// sharing.
class Controller {
 public:
  Controller() = default;
  Controller(std::string id, IpAddress ip, std::uint64_t rng_seed)
      : id_(std::move(id)), ip_(ip), rng_(rng_seed) {}

  const std::string& id() const { return id_; }
  IpAddress ip() const { return ip_; }

  void add_peer(const std::string& peer_id, PeerInfo info) {
    peers_[peer_id] = info;
  }
  void add_host(IpAddress ip, HostInfo info) { host_directory_[ip] = info; }

  const std::set<std::string>& switches() const { return switches_; }
  const std::set<IpAddress>& block_list() const { return block_list_; }
  const std::map<IpAddress, Registration>& registered_hosts() const {
    return registered_hosts_;
  }

  std::vector<ControllerEffect> on_switch_connect(const std::string& switch_id) {
    if (switches_.count(switch_id)) throw DuplicateSwitch(switch_id);
    switches_.insert(switch_id);
    seen_[switch_id] = {};
    std::vector<ControllerEffect> fx;
    FlowEntry miss = make_miss_entry(next_cookie_++, 0);
    fx.push_back(FxInstallFlow{switch_id, miss});
    return fx;
  }

  std::vector<ControllerEffect> on_packet_in(const Packet& p,
                                             const std::string& switch_id,
                                             TimeUs now_us) {
    if (!switches_.count(switch_id)) throw UnknownSwitch(switch_id);
    std::vector<ControllerEffect> fx;
    seen_[switch_id].insert(p.src_ip);

    if (const WireMessage* msg = p.control()) {
      switch (msg->msg_type) {
        case MsgType::kRegister:
          handle_register(*msg, p, switch_id, now_us, fx);
          return fx;
        case MsgType::kAlert:
          handle_alert(*msg, switch_id, now_us, fx);
          return fx;
        default:
          fx.push_back(FxLog{"ignored control message " +
                             std::string(to_string(msg->msg_type))});
          return fx;
      }
    }
    if (auto* arp = std::get_if<ArpRequest>(&p.kind)) {
      handle_arp(*arp, p, switch_id, fx);
      return fx;
    }
    if (std::holds_alternative<ArpReply>(p.kind)) {
      return fx;  // hosts answer these; nothing for the controller to do
    }
    handle_ip_data(p, switch_id, now_us, fx);
    return fx;
  }

  // Attack share from a peer controller (PEER_SHARE carries the pre-shared
  // secret in the passcode field).
  std::vector<ControllerEffect> on_peer_message(const WireMessage& share,
                                                TimeUs now_us) {
    std::vector<ControllerEffect> fx;
    if (share.msg_type != MsgType::kPeerShare || !share.attacker_ip ||
        !verify_peer(share)) {
      fx.push_back(FxLog{"UNVERIFIED_PEER from " + share.sender_ip.to_string()});
      return fx;
    }
    IpAddress attacker = *share.attacker_ip;
    block_list_.insert(attacker);
    for (const auto& sw : switches_) {
      if (seen_.at(sw).count(attacker)) {
        fx.push_back(FxInstallFlow{sw, drop_rule(attacker, now_us)});
      }
    }
    return fx;
  }

  // UDP-mode entry point: an off-band REGISTER/ALERT from a host. The
  // relevant switch is resolved through the host directory.
  std::vector<ControllerEffect> on_control_message(const WireMessage& msg,
                                                   TimeUs now_us) {
    std::vector<ControllerEffect> fx;
    if (msg.msg_type == MsgType::kPeerShare) return on_peer_message(msg, now_us);
    auto host = host_directory_.find(msg.sender_ip);
    if (host == host_directory_.end()) {
      fx.push_back(FxLog{"control message from unknown host " +
                         msg.sender_ip.to_string()});
      return fx;
    }
    const std::string& sw = host->second.switch_id;
    if (msg.msg_type == MsgType::kRegister) {
      Packet p;
      p.src_ip = msg.sender_ip;
      p.dst_ip = ip_;
      p.src_port = msg.sender_port;
      p.dst_port = kControlPort;
      p.kind = ControlPayload{msg};
      handle_register(msg, p, sw, now_us, fx);
    } else if (msg.msg_type == MsgType::kAlert) {
      handle_alert(msg, sw, now_us, fx);
    }
    return fx;
  }

  bool verify_trusted(IpAddress sender_ip, std::uint64_t passcode) const {
    auto it = registered_hosts_.find(sender_ip);
    return it != registered_hosts_.end() && it->second.passcode == passcode;
  }

  bool has_evidence(const std::string& switch_id, IpAddress ip) const {
    auto it = seen_.find(switch_id);
    if (it == seen_.end()) throw UnknownSwitch(switch_id);
    return it->second.count(ip) > 0;
  }

  // Deterministic for a fixed seed; regenerates on collision with any
  // previously issued token.
  std::uint64_t generate_passcode() {
    std::uint64_t token;
    do {
      token = rng_();
    } while (!issued_passcodes_.insert(token).second);
    return token;
  }

 private:
  void handle_register(const WireMessage& msg, const Packet& p,
                       const std::string& switch_id, TimeUs now_us,
                       std::vector<ControllerEffect>& fx) {
    // Threat model assumes registrants are not compromised; accept any host.
    std::uint64_t passcode;
    auto it = registered_hosts_.find(msg.sender_ip);
    if (it != registered_hosts_.end()) {
      passcode = it->second.passcode;  // re-registration re-sends the token
    } else {
      passcode = generate_passcode();
      registered_hosts_[msg.sender_ip] = Registration{passcode, now_us};
    }
    WireMessage ack;
    ack.msg_type = MsgType::kRegisterAck;
    ack.sender_ip = ip_;
    ack.sender_port = kControlPort;
    ack.timestamp_ms = now_us / 1000;
    ack.passcode = passcode;

    auto host = host_directory_.find(msg.sender_ip);
    if (host != host_directory_.end()) {
      Packet out;
      out.src_ip = ip_;
      out.dst_ip = msg.sender_ip;
      out.dst_mac = host->second.mac;
      out.src_port = kControlPort;
      out.dst_port = msg.sender_port;
      out.kind = ControlPayload{ack};
      fx.push_back(FxInjectPacket{host->second.switch_id, host->second.port, out});
    } else {
      // fall back to the ingress path for hosts outside the directory
      Packet out;
      out.src_ip = ip_;
      out.dst_ip = msg.sender_ip;
      out.src_port = kControlPort;
      out.dst_port = msg.sender_port;
      out.kind = ControlPayload{ack};
      fx.push_back(FxInjectPacket{switch_id, ingress_of(p, switch_id), out});
    }
    fx.push_back(FxLog{"registered " + msg.sender_ip.to_string()});
  }

  void handle_alert(const WireMessage& msg, const std::string& switch_id,
                    TimeUs now_us, std::vector<ControllerEffect>& fx) {
    if (!msg.attacker_ip || !msg.passcode ||
        !verify_trusted(msg.sender_ip, *msg.passcode)) {
      fx.push_back(FxLog{"ALERT_REJECTED untrusted sender " +
                         msg.sender_ip.to_string()});
      return;
    }
    IpAddress attacker = *msg.attacker_ip;
    if (!has_evidence(switch_id, attacker)) {
      fx.push_back(FxLog{"ALERT_REJECTED no evidence for " +
                         attacker.to_string() + " on " + switch_id});
      return;
    }
    block_list_.insert(attacker);
    fx.push_back(FxInstallFlow{switch_id, drop_rule(attacker, now_us)});
    for (const auto& [peer_id, peer] : peers_) {
      WireMessage share;
      share.msg_type = MsgType::kPeerShare;
      share.sender_ip = ip_;
      share.sender_port = kControlPort;
      share.timestamp_ms = now_us / 1000;
      share.passcode = peer.shared_secret;
      share.attacker_ip = attacker;
      fx.push_back(FxSendToPeer{peer_id, share});
    }
  }

  void handle_arp(const ArpRequest& arp, const Packet& p,
                  const std::string& switch_id,
                  std::vector<ControllerEffect>& fx) {
    auto target = host_directory_.find(arp.target);
    if (target == host_directory_.end()) {
      fx.push_back(FxLog{"ARP target unknown " + arp.target.to_string()});
      return;
    }
    Packet reply;
    reply.src_ip = arp.target;
    reply.dst_ip = p.src_ip;
    reply.src_mac = target->second.mac;
    reply.kind = ArpReply{arp.target, target->second.mac};
    fx.push_back(FxInjectPacket{switch_id, ingress_of(p, switch_id), reply});
  }

  void handle_ip_data(const Packet& p, const std::string& switch_id,
                      TimeUs now_us, std::vector<ControllerEffect>& fx) {
    if (block_list_.count(p.src_ip)) {
      // lazy blocking from the block list
      fx.push_back(FxInstallFlow{switch_id, drop_rule(p.src_ip, now_us)});
      return;
    }
    auto dst = host_directory_.find(p.dst_ip);
    if (dst == host_directory_.end() || dst->second.switch_id != switch_id) {
      fx.push_back(FxLog{"UNKNOWN_DESTINATION " + p.dst_ip.to_string() +
                         " on " + switch_id});
      return;
    }
    FlowEntry fwd;
    fwd.match.dst_ip = p.dst_ip;
    fwd.action = ActionForward{dst->second.port};
    fwd.priority = kPriorityForward;
    fwd.hard_timeout_us = forward_timeout_us_;
    fwd.cookie = next_cookie_++;
    fx.push_back(FxInstallFlow{switch_id, fwd});
    // re-inject so the triggering packet is not lost
    fx.push_back(FxInjectPacket{switch_id, dst->second.port, p});
  }

  bool verify_peer(const WireMessage& share) const {
    for (const auto& [peer_id, peer] : peers_) {
      if (peer.address == share.sender_ip && share.passcode &&
          *share.passcode == peer.shared_secret)
        return true;
    }
    return false;
  }

  FlowEntry drop_rule(IpAddress attacker, TimeUs /*now_us*/) {
    FlowEntry e;
    e.match.src_ip = attacker;
    e.action = ActionDrop{};
    e.priority = kPriorityDrop;
    e.hard_timeout_us = 0;  // permanent
    e.cookie = next_cookie_++;
    return e;
  }

  PortId ingress_of(const Packet& p, const std::string& switch_id) const {
    auto host = host_directory_.find(p.src_ip);
    if (host != host_directory_.end() && host->second.switch_id == switch_id)
      return host->second.port;
    return kControllerPort;
  }

 public:
  void set_forward_timeout_us(TimeUs t) { forward_timeout_us_ = t; }

 private:
  std::string id_;
  IpAddress ip_;
  std::set<std::string> switches_;
  std::map<std::string, std::set<IpAddress>> seen_;  // T_s
  std::set<IpAddress> block_list_;                   // L, never shrinks
  std::map<IpAddress, Registration> registered_hosts_;
  std::map<std::string, PeerInfo> peers_;
  std::map<IpAddress, HostInfo> host_directory_;
  std::set<std::uint64_t> issued_passcodes_;
  std::mt19937_64 rng_;
  std::uint64_t next_cookie_ = 1;
  TimeUs forward_timeout_us_ = 0;
};

}  // namespace coopsdn
