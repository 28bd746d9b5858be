#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "coopsdn/flow_switch.hpp"

using namespace coopsdn;

namespace {

IpAddress ip(const char* s) { return *IpAddress::parse(s); }

Packet data_packet(IpAddress src, IpAddress dst) {
  Packet p;
  p.src_ip = src;
  p.dst_ip = dst;
  p.kind = IpData{};
  return p;
}

FlowEntry entry(FlowMatch m, FlowAction a, std::uint32_t prio,
                std::uint64_t cookie, TimeUs timeout = 0) {
  FlowEntry e;
  e.match = m;
  e.action = a;
  e.priority = prio;
  e.cookie = cookie;
  e.hard_timeout_us = timeout;
  return e;
}

// Independent oracle: brute-force scan selecting the winner by
// (priority, installed_at, -cookie), over the raw table.
const FlowEntry* oracle_lookup(const std::vector<FlowEntry>& table,
                               const Packet& p) {
  const FlowEntry* best = nullptr;
  for (const auto& e : table) {
    bool hit = (!e.match.src_ip || *e.match.src_ip == p.src_ip) &&
               (!e.match.dst_ip || *e.match.dst_ip == p.dst_ip);
    if (!hit) continue;
    if (!best || e.priority > best->priority ||
        (e.priority == best->priority &&
         (e.installed_at_us > best->installed_at_us ||
          (e.installed_at_us == best->installed_at_us &&
           e.cookie < best->cookie))))
      best = &e;
  }
  return best;
}

}  // namespace

TEST_CASE("matches semantics") {
  FlowMatch src_only{ip("10.0.0.9"), std::nullopt};
  REQUIRE(matches(src_only, data_packet(ip("10.0.0.9"), ip("10.0.1.5"))));
  REQUIRE(matches(FlowMatch{}, data_packet(ip("1.2.3.4"), ip("5.6.7.8"))));
  FlowMatch dst_only{std::nullopt, ip("10.0.2.5")};
  REQUIRE_FALSE(matches(dst_only, data_packet(ip("10.0.0.9"), ip("10.0.1.5"))));
}

TEST_CASE("match monotonicity and wildcard totality") {
  std::mt19937_64 rng(11);
  auto rand_ip = [&] { return IpAddress{static_cast<std::uint32_t>(rng() % 16)}; };
  for (int i = 0; i < 2000; ++i) {
    Packet p = data_packet(rand_ip(), rand_ip());
    REQUIRE(matches(FlowMatch{}, p));
    // B has a superset of A's present fields
    FlowMatch b{rng() % 2 ? std::optional(rand_ip()) : std::nullopt,
                rng() % 2 ? std::optional(rand_ip()) : std::nullopt};
    FlowMatch a = b;
    if (rng() % 2) a.src_ip.reset();
    if (rng() % 2) a.dst_ip.reset();
    if (matches(b, p)) REQUIRE(matches(a, p));
  }
}

TEST_CASE("lookup picks highest priority, drop beats forward beats miss") {
  FlowSwitch sw("s1");
  sw.on_controller_connect(0, 0);
  sw.install_flow(entry({std::nullopt, ip("10.0.1.5")}, ActionForward{1},
                        kPriorityForward, 10),
                  100);
  sw.install_flow(entry({ip("10.0.0.9"), std::nullopt}, ActionDrop{},
                        kPriorityDrop, 11),
                  200);

  auto& drop_winner = sw.lookup(data_packet(ip("10.0.0.9"), ip("10.0.1.5")));
  REQUIRE(drop_winner.priority == kPriorityDrop);
  auto& fwd_winner = sw.lookup(data_packet(ip("10.0.3.3"), ip("10.0.1.5")));
  REQUIRE(fwd_winner.priority == kPriorityForward);
  auto& miss_winner = sw.lookup(data_packet(ip("10.0.3.3"), ip("10.0.9.9")));
  REQUIRE(miss_winner.priority == kPriorityMiss);
}

TEST_CASE("lookup before initialization fails") {
  FlowSwitch sw("s1");
  REQUIRE_THROWS_AS(sw.lookup(data_packet(ip("1.1.1.1"), ip("2.2.2.2"))),
                    NoMissEntry);
}

TEST_CASE("process_packet effects and counters") {
  FlowSwitch sw("s1");
  sw.on_controller_connect(0, 0);

  auto fx = sw.process_packet(data_packet(ip("10.0.0.9"), ip("10.0.1.5")), 2, 0);
  REQUIRE(fx.size() == 1);
  REQUIRE(std::holds_alternative<EffectPacketIn>(fx[0]));
  REQUIRE(std::get<EffectPacketIn>(fx[0]).ingress == 2);

  sw.install_flow(entry({std::nullopt, ip("10.0.1.5")}, ActionForward{1},
                        kPriorityForward, 1),
                  10);
  fx = sw.process_packet(data_packet(ip("10.0.0.9"), ip("10.0.1.5")), 2, 20);
  REQUIRE(std::holds_alternative<EffectDeliver>(fx[0]));
  REQUIRE(std::get<EffectDeliver>(fx[0]).port == 1);

  sw.install_flow(entry({ip("10.0.0.9"), std::nullopt}, ActionDrop{},
                        kPriorityDrop, 2),
                  30);
  fx = sw.process_packet(data_packet(ip("10.0.0.9"), ip("10.0.1.5")), 2, 40);
  REQUIRE(std::holds_alternative<EffectDropped>(fx[0]));

  // drop entry counted one packet, 64 bytes
  for (const auto& e : sw.table()) {
    if (e.priority == kPriorityDrop) {
      REQUIRE(e.packet_count == 1);
      REQUIRE(e.byte_count == 64);
    }
  }
}

TEST_CASE("install replaces same (match, priority)") {
  FlowSwitch sw("s1");
  sw.on_controller_connect(0, 0);
  auto e1 = entry({ip("10.0.0.9"), std::nullopt}, ActionDrop{}, kPriorityDrop,
                  1, ms_to_us(1000));
  sw.install_flow(e1, 100);
  auto e2 = e1;
  e2.hard_timeout_us = ms_to_us(5000);
  sw.install_flow(e2, 200);
  int count = 0;
  for (const auto& e : sw.table())
    if (e.priority == kPriorityDrop) {
      ++count;
      REQUIRE(e.hard_timeout_us == ms_to_us(5000));
      REQUIRE(e.installed_at_us == 200);
    }
  REQUIRE(count == 1);
}

TEST_CASE("hard timeout expiry boundaries") {
  FlowSwitch sw("s1");
  sw.on_controller_connect(0, 0);
  sw.install_flow(entry({ip("10.0.0.9"), std::nullopt}, ActionDrop{},
                        kPriorityDrop, 1, ms_to_us(1000)),
                  ms_to_us(5000));

  REQUIRE(sw.expire_flows(ms_to_us(5999)).empty());
  auto removed = sw.expire_flows(ms_to_us(6000));
  REQUIRE(removed.size() == 1);
  REQUIRE(removed[0].at_us == ms_to_us(6000));  // exactly installed + timeout
  // miss entry (timeout 0) never expires
  REQUIRE(sw.expire_flows(ms_to_us(1000000)).empty());
  REQUIRE(sw.has_miss_entry());
}

TEST_CASE("reconnect resets to miss-only") {
  FlowSwitch sw("s1");
  sw.on_controller_connect(0, 0);
  sw.install_flow(entry({ip("10.0.0.9"), std::nullopt}, ActionDrop{},
                        kPriorityDrop, 1),
                  10);
  REQUIRE(sw.table().size() == 2);
  sw.on_controller_connect(0, 100);
  REQUIRE(sw.table().size() == 1);
  REQUIRE(sw.has_miss_entry());
}

TEST_CASE("lookup agrees with brute-force oracle on random tables") {
  std::mt19937_64 rng(1234);
  auto rand_ip = [&] { return IpAddress{static_cast<std::uint32_t>(rng() % 8)}; };
  for (int trial = 0; trial < 2000; ++trial) {
    FlowSwitch sw("s");
    sw.on_controller_connect(0, 0);
    int n = static_cast<int>(rng() % 32);
    for (int i = 0; i < n; ++i) {
      FlowMatch m{rng() % 2 ? std::optional(rand_ip()) : std::nullopt,
                  rng() % 2 ? std::optional(rand_ip()) : std::nullopt};
      FlowAction a = rng() % 2 ? FlowAction{ActionDrop{}}
                               : FlowAction{ActionForward{static_cast<PortId>(1 + rng() % 4)}};
      sw.install_flow(entry(m, a, 1 + static_cast<std::uint32_t>(rng() % 300),
                            rng() % 100, 0),
                      static_cast<TimeUs>(rng() % 1000));
    }
    // uniqueness invariant
    std::set<std::pair<std::string, std::uint32_t>> keys;
    for (const auto& e : sw.table())
      REQUIRE(keys.insert({e.match.to_string(), e.priority}).second);

    Packet p = data_packet(rand_ip(), rand_ip());
    const FlowEntry* expect = oracle_lookup(sw.table(), p);
    const FlowEntry& got = sw.lookup(p);
    REQUIRE(expect != nullptr);
    REQUIRE(got.priority == expect->priority);
    REQUIRE(got.cookie == expect->cookie);
    REQUIRE(got.installed_at_us == expect->installed_at_us);
  }
}
