#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "coopsdn/controller.hpp"
#include "coopsdn/topology.hpp"

using namespace coopsdn;

namespace {

IpAddress ip(const char* s) { return *IpAddress::parse(s); }

const IpAddress kVictim = {0x0a000105};    // 10.0.1.5
const IpAddress kAttacker = {0x0a000009};  // 10.0.0.9
const IpAddress kPeerIp = {0x0a000264};    // 10.0.2.100

Controller make_controller(std::uint64_t seed = 42) {
  Controller c("c1", ip("10.0.1.100"), seed);
  c.add_host(kVictim, HostInfo{mac_from_ip(kVictim), "s1", 1});
  c.add_host(kAttacker, HostInfo{mac_from_ip(kAttacker), "s1", 2});
  c.add_peer("c2", PeerInfo{kPeerIp, 0xbeef});
  return c;
}

Packet data_packet(IpAddress src, IpAddress dst, std::uint16_t dport = 22) {
  Packet p;
  p.src_ip = src;
  p.dst_ip = dst;
  p.dst_port = dport;
  p.kind = IpData{};
  return p;
}

Packet control_packet(const WireMessage& m, IpAddress dst) {
  Packet p;
  p.src_ip = m.sender_ip;
  p.dst_ip = dst;
  p.src_port = m.sender_port;
  p.dst_port = kControlPort;
  p.kind = ControlPayload{m};
  return p;
}

WireMessage alert_msg(IpAddress sender, std::uint64_t passcode,
                      IpAddress attacker) {
  WireMessage m;
  m.msg_type = MsgType::kAlert;
  m.sender_ip = sender;
  m.sender_port = 5001;
  m.passcode = passcode;
  m.attacker_ip = attacker;
  return m;
}

int count_installs(const std::vector<ControllerEffect>& fx) {
  int n = 0;
  for (const auto& f : fx)
    if (std::holds_alternative<FxInstallFlow>(f)) ++n;
  return n;
}

// registers the victim through the packet-in path, returns the passcode
std::uint64_t register_victim(Controller& c, IpAddress victim) {
  WireMessage reg;
  reg.msg_type = MsgType::kRegister;
  reg.sender_ip = victim;
  reg.sender_port = 5001;
  auto fx = c.on_packet_in(control_packet(reg, c.ip()), "s1", 0);
  for (const auto& f : fx) {
    if (auto* out = std::get_if<FxInjectPacket>(&f)) {
      const WireMessage* ack = out->packet.control();
      REQUIRE(ack);
      REQUIRE(ack->msg_type == MsgType::kRegisterAck);
      return *ack->passcode;
    }
  }
  FAIL("no REGISTER_ACK emitted");
  return 0;
}

}  // namespace

TEST_CASE("switch connect initializes per-switch state") {
  auto c = make_controller();
  auto fx = c.on_switch_connect("s1");
  REQUIRE(count_installs(fx) == 1);
  const auto& miss = std::get<FxInstallFlow>(fx[0]).entry;
  REQUIRE(miss.priority == kPriorityMiss);
  REQUIRE(miss.match.is_wildcard());
  REQUIRE(std::holds_alternative<ActionSendToController>(miss.action));

  REQUIRE_THROWS_AS(c.on_switch_connect("s1"), DuplicateSwitch);

  c.on_switch_connect("s2");
  // two independent T tables
  c.on_packet_in(data_packet(kAttacker, kVictim), "s1", 0);
  REQUIRE(c.has_evidence("s1", kAttacker));
  REQUIRE_FALSE(c.has_evidence("s2", kAttacker));
  REQUIRE_THROWS_AS(c.has_evidence("s3", kAttacker), UnknownSwitch);
}

TEST_CASE("packet-in on unknown switch rejected") {
  auto c = make_controller();
  REQUIRE_THROWS_AS(c.on_packet_in(data_packet(kAttacker, kVictim), "s1", 0),
                    UnknownSwitch);
}

TEST_CASE("first data packet installs forward rule and re-injects") {
  auto c = make_controller();
  c.on_switch_connect("s1");
  auto fx = c.on_packet_in(data_packet(kAttacker, kVictim), "s1", 1000);
  REQUIRE(count_installs(fx) == 1);
  const auto& fwd = std::get<FxInstallFlow>(fx[0]).entry;
  REQUIRE(fwd.priority == kPriorityForward);
  REQUIRE(fwd.match.dst_ip == kVictim);
  REQUIRE_FALSE(fwd.match.src_ip.has_value());
  REQUIRE(std::get<ActionForward>(fwd.action).port == 1);
  bool reinjected = false;
  for (const auto& f : fx)
    if (auto* out = std::get_if<FxInjectPacket>(&f)) {
      reinjected = true;
      REQUIRE(out->out_port == 1);
      REQUIRE(out->packet.src_ip == kAttacker);
    }
  REQUIRE(reinjected);
}

TEST_CASE("unknown destination drops the packet") {
  auto c = make_controller();
  c.on_switch_connect("s1");
  auto fx = c.on_packet_in(data_packet(kAttacker, ip("10.9.9.9")), "s1", 0);
  REQUIRE(count_installs(fx) == 0);
  // still recorded as evidence
  REQUIRE(c.has_evidence("s1", kAttacker));
}

TEST_CASE("registration issues a passcode; trust verification") {
  auto c = make_controller();
  c.on_switch_connect("s1");
  std::uint64_t passcode = register_victim(c, kVictim);
  REQUIRE(c.verify_trusted(kVictim, passcode));
  REQUIRE_FALSE(c.verify_trusted(kVictim, passcode ^ 1));
  REQUIRE_FALSE(c.verify_trusted(kAttacker, passcode));
}

TEST_CASE("passcode generation is deterministic, unique") {
  auto a = make_controller(42);
  auto b = make_controller(42);
  REQUIRE(a.generate_passcode() == b.generate_passcode());
  auto d = make_controller(43);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) REQUIRE(seen.insert(d.generate_passcode()).second);
}

TEST_CASE("valid alert installs drop rule and shares with peers") {
  auto c = make_controller();
  c.on_switch_connect("s1");
  std::uint64_t passcode = register_victim(c, kVictim);
  c.on_packet_in(data_packet(kAttacker, kVictim), "s1", 1000);  // evidence

  auto fx = c.on_packet_in(
      control_packet(alert_msg(kVictim, passcode, kAttacker), c.ip()), "s1",
      2000);
  REQUIRE(count_installs(fx) == 1);
  const auto& drop = std::get<FxInstallFlow>(fx[0]).entry;
  REQUIRE(drop.priority == kPriorityDrop);
  REQUIRE(drop.match.src_ip == kAttacker);
  REQUIRE(std::holds_alternative<ActionDrop>(drop.action));
  REQUIRE(drop.hard_timeout_us == 0);  // permanent

  int shares = 0;
  for (const auto& f : fx)
    if (auto* s = std::get_if<FxSendToPeer>(&f)) {
      ++shares;
      REQUIRE(s->peer_id == "c2");
      REQUIRE(s->msg.msg_type == MsgType::kPeerShare);
      REQUIRE(s->msg.attacker_ip == kAttacker);
      REQUIRE(s->msg.passcode == 0xbeef);  // pre-shared secret
    }
  REQUIRE(shares == 1);
  REQUIRE(c.block_list().count(kAttacker) == 1);
}

TEST_CASE("alert gates: wrong passcode, unregistered, no evidence") {
  auto c = make_controller();
  c.on_switch_connect("s1");
  std::uint64_t passcode = register_victim(c, kVictim);
  c.on_packet_in(data_packet(kAttacker, kVictim), "s1", 1000);

  SECTION("wrong passcode") {
    auto fx = c.on_packet_in(
        control_packet(alert_msg(kVictim, passcode ^ 0xff, kAttacker), c.ip()),
        "s1", 2000);
    REQUIRE(count_installs(fx) == 0);
  }
  SECTION("unregistered sender") {
    auto fx = c.on_packet_in(
        control_packet(alert_msg(ip("10.0.1.77"), passcode, kAttacker), c.ip()),
        "s1", 2000);
    REQUIRE(count_installs(fx) == 0);
  }
  SECTION("no evidence for reported ip") {
    auto fx = c.on_packet_in(
        control_packet(alert_msg(kVictim, passcode, ip("99.9.9.9")), c.ip()),
        "s1", 2000);
    REQUIRE(count_installs(fx) == 0);
    REQUIRE(c.block_list().empty());
  }
}

TEST_CASE("peer share paths") {
  auto c = make_controller();
  c.on_switch_connect("s1");
  c.on_switch_connect("s2");

  WireMessage share;
  share.msg_type = MsgType::kPeerShare;
  share.sender_ip = kPeerIp;
  share.sender_port = kControlPort;
  share.passcode = 0xbeef;
  share.attacker_ip = kAttacker;

  SECTION("attacker unseen: block list only") {
    auto fx = c.on_peer_message(share, 0);
    REQUIRE(count_installs(fx) == 0);
    REQUIRE(c.block_list().count(kAttacker) == 1);

    // lazy blocking: next data packet from the blocked source
    auto fx2 = c.on_packet_in(data_packet(kAttacker, kVictim), "s1", 100);
    REQUIRE(count_installs(fx2) == 1);
    REQUIRE(std::get<FxInstallFlow>(fx2[0]).entry.priority == kPriorityDrop);
  }
  SECTION("attacker already seen on s2: immediate drop there") {
    c.on_packet_in(data_packet(kAttacker, kVictim), "s2", 50);
    auto fx = c.on_peer_message(share, 100);
    REQUIRE(count_installs(fx) == 1);
    REQUIRE(std::get<FxInstallFlow>(fx[0]).switch_id == "s2");
  }
  SECTION("wrong secret ignored") {
    share.passcode = 0xdead;
    auto fx = c.on_peer_message(share, 0);
    REQUIRE(count_installs(fx) == 0);
    REQUIRE(c.block_list().empty());
  }
  SECTION("unknown sender ignored") {
    share.sender_ip = ip("66.6.6.6");
    auto fx = c.on_peer_message(share, 0);
    REQUIRE(count_installs(fx) == 0);
    REQUIRE(c.block_list().empty());
  }
}

TEST_CASE("ARP request answered from host directory") {
  auto c = make_controller();
  c.on_switch_connect("s1");
  Packet arp;
  arp.src_ip = kVictim;
  arp.dst_ip = kAttacker;
  arp.kind = ArpRequest{kAttacker};
  auto fx = c.on_packet_in(arp, "s1", 0);
  bool replied = false;
  for (const auto& f : fx)
    if (auto* out = std::get_if<FxInjectPacket>(&f)) {
      replied = true;
      auto* reply = std::get_if<ArpReply>(&out->packet.kind);
      REQUIRE(reply);
      REQUIRE(reply->mac == mac_from_ip(kAttacker));
      REQUIRE(out->out_port == 1);  // back to the requester
    }
  REQUIRE(replied);
}

TEST_CASE("every packet-in updates T_s regardless of kind") {
  auto c = make_controller();
  c.on_switch_connect("s1");
  WireMessage reg;
  reg.msg_type = MsgType::kRegister;
  reg.sender_ip = kVictim;
  c.on_packet_in(control_packet(reg, c.ip()), "s1", 0);
  REQUIRE(c.has_evidence("s1", kVictim));
  Packet arp;
  arp.src_ip = ip("10.0.1.50");
  arp.kind = ArpRequest{kVictim};
  c.on_packet_in(arp, "s1", 0);
  REQUIRE(c.has_evidence("s1", ip("10.0.1.50")));
}

TEST_CASE("trust and evidence gate fuzz never mutates flow tables") {
  auto c = make_controller();
  c.on_switch_connect("s1");
  std::uint64_t passcode = register_victim(c, kVictim);
  c.on_packet_in(data_packet(kAttacker, kVictim), "s1", 0);

  std::mt19937_64 rng(99);
  for (int i = 0; i < 2000; ++i) {
    std::vector<ControllerEffect> fx;
    switch (rng() % 5) {
      case 0:
        fx = c.on_packet_in(
            control_packet(
                alert_msg(kVictim, passcode ^ (1 + rng() % 0xffff), kAttacker),
                c.ip()),
            "s1", 10);
        break;
      case 1:
        // high bit set: never collides with a registered host address
        fx = c.on_packet_in(
            control_packet(
                alert_msg(IpAddress{static_cast<std::uint32_t>(rng()) | 0x80000000u},
                          passcode, kAttacker),
                c.ip()),
            "s1", 10);
        break;
      case 2:
        fx = c.on_packet_in(
            control_packet(
                alert_msg(kVictim, passcode,
                          IpAddress{static_cast<std::uint32_t>(rng() | 0xff)}),
                c.ip()),
            "s1", 10);
        break;
      case 3: {
        WireMessage share;
        share.msg_type = MsgType::kPeerShare;
        share.sender_ip = kPeerIp;
        share.passcode = rng() | 1;  // wrong secret (0xbeef is even)
        share.attacker_ip = kAttacker;
        fx = c.on_peer_message(share, 10);
        break;
      }
      default: {
        WireMessage share;
        share.msg_type = MsgType::kPeerShare;
        share.sender_ip = IpAddress{static_cast<std::uint32_t>(rng())};
        share.passcode = 0xbeef;
        share.attacker_ip = kAttacker;
        if (share.sender_ip == kPeerIp) break;
        fx = c.on_peer_message(share, 10);
        break;
      }
    }
    REQUIRE(count_installs(fx) == 0);
  }
  REQUIRE(c.block_list().empty());
}
