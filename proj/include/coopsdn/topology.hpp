#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coopsdn/addr.hpp"
#include "coopsdn/errors.hpp"
#include "coopsdn/packet.hpp"

namespace coopsdn {

// Per-link and per-node delays. Profile values are defaults; individual
// links may override their one-way latency.
struct LatencyProfile {
  TimeUs link_us = 0;            // host-switch and switch-controller links
  TimeUs victim_detect_us = 0;   // detection to alert emission
  TimeUs controller_handle_us = 0;
  TimeUs switch_install_us = 0;  // command delivery to entry active
  TimeUs peer_share_us = 0;      // one-way controller-to-controller

  void validate() const {
    if (link_us < 0 || victim_detect_us < 0 || controller_handle_us < 0 ||
        switch_install_us < 0 || peer_share_us < 0)
      throw ConfigError("latency values must be >= 0");
  }
};

// Calibration presets. The "geni" and "hardware" numbers reproduce the
// published virtual-testbed and hardware-switch averages.
inline std::optional<LatencyProfile> latency_profile(const std::string& name) {
  if (name == "zero") return LatencyProfile{};
  if (name == "geni")
    return LatencyProfile{0, ms_to_us(520), 0, ms_to_us(46), ms_to_us(436)};
  if (name == "hardware")
    return LatencyProfile{ms_to_us(1), ms_to_us(304), 0, ms_to_us(50),
                          ms_to_us(436)};
  return std::nullopt;
}

struct Attachment {
  std::string switch_id;
  PortId port = 1;
};

struct HostSpec {
  std::string id;
  IpAddress ip;
  MacAddress mac;
  bool is_attacker = false;
  bool detector_enabled = false;
  std::vector<Attachment> attach;  // victims: exactly one; attacker may bridge
};

struct SwitchSpec {
  std::string id;
  std::string controller_id;
};

struct ControllerSpec {
  std::string id;
  IpAddress ip;
};

struct Peering {
  std::string a, b;
  std::uint64_t shared_secret = 0;
};

// Link endpoints are node ids; latency overrides the profile default when set.
struct LinkOverride {
  std::string a, b;
  TimeUs one_way_us = 0;
};

struct Topology {
  std::vector<ControllerSpec> controllers;
  std::vector<SwitchSpec> switches;
  std::vector<HostSpec> hosts;
  std::vector<Peering> peerings;
  std::vector<LinkOverride> link_overrides;

  const HostSpec* find_host(IpAddress ip) const {
    for (const auto& h : hosts)
      if (h.ip == ip) return &h;
    return nullptr;
  }
  const HostSpec* find_host(const std::string& id) const {
    for (const auto& h : hosts)
      if (h.id == id) return &h;
    return nullptr;
  }
  const SwitchSpec* find_switch(const std::string& id) const {
    for (const auto& s : switches)
      if (s.id == id) return &s;
    return nullptr;
  }
  const ControllerSpec* find_controller(const std::string& id) const {
    for (const auto& c : controllers)
      if (c.id == id) return &c;
    return nullptr;
  }

  TimeUs link_latency(const std::string& a, const std::string& b,
                      TimeUs fallback) const {
    for (const auto& l : link_overrides) {
      if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return l.one_way_us;
    }
    return fallback;
  }

  void validate() const {
    std::set<std::string> ids;
    auto unique_id = [&](const std::string& id) {
      if (!ids.insert(id).second)
        throw ConfigError("topology: duplicate node id " + id);
    };
    for (const auto& c : controllers) unique_id(c.id);
    for (const auto& s : switches) {
      unique_id(s.id);
      if (!find_controller(s.controller_id))
        throw ConfigError("topology.switches: " + s.id +
                          " references unknown controller " + s.controller_id);
    }
    std::set<IpAddress> host_ips;
    for (const auto& h : hosts) {
      unique_id(h.id);
      if (!host_ips.insert(h.ip).second)
        throw ConfigError("topology.hosts: duplicate ip " + h.ip.to_string());
      if (h.attach.empty())
        throw ConfigError("topology.hosts: " + h.id + " has no attachment");
      if (!h.is_attacker && h.attach.size() != 1)
        throw ConfigError("topology.hosts: " + h.id +
                          " must attach to exactly one switch port");
      for (const auto& a : h.attach) {
        if (!find_switch(a.switch_id))
          throw ConfigError("topology.hosts: " + h.id +
                            " attached to unknown switch " + a.switch_id);
        if (a.port == kControllerPort)
          throw ConfigError("topology.hosts: " + h.id +
                            " uses reserved port 0");
      }
    }
    for (const auto& p : peerings) {
      if (!find_controller(p.a) || !find_controller(p.b))
        throw ConfigError("topology.peerings: unknown controller in " + p.a +
                          "-" + p.b);
    }
    for (const auto& l : link_overrides) {
      if (!ids.count(l.a) || !ids.count(l.b))
        throw ConfigError("topology.links: unknown endpoint in " + l.a + "-" +
                          l.b);
      if (l.one_way_us < 0)
        throw ConfigError("topology.links: negative latency on " + l.a + "-" +
                          l.b);
    }
  }
};

inline MacAddress mac_from_ip(IpAddress ip) {
  return MacAddress{0x020000000000ULL | ip.value};
}

constexpr std::uint64_t kDefaultPeerSecret = 0x5ec7e7c0de;

// Two networks sharing one attacker: controller + switch + victim each,
// attacker bridging both switches. The second victim has no detector, so
// its network is protected only through cooperation.
inline Topology preset_geni_fig3() {
  Topology t;
  auto ip = [](const char* s) { return *IpAddress::parse(s); };
  t.controllers = {{"c1", ip("10.0.1.100")}, {"c2", ip("10.0.2.100")}};
  t.switches = {{"s1", "c1"}, {"s2", "c2"}};
  t.hosts = {
      {"v1", ip("10.0.1.5"), mac_from_ip(ip("10.0.1.5")), false, true, {{"s1", 1}}},
      {"v2", ip("10.0.2.5"), mac_from_ip(ip("10.0.2.5")), false, false, {{"s2", 1}}},
      {"a1", ip("10.0.0.9"), mac_from_ip(ip("10.0.0.9")), true, false,
       {{"s1", 2}, {"s2", 2}}},
  };
  t.peerings = {{"c1", "c2", kDefaultPeerSecret}};
  return t;
}

// Degenerate single-network variant.
inline Topology preset_single_net() {
  Topology t;
  auto ip = [](const char* s) { return *IpAddress::parse(s); };
  t.controllers = {{"c1", ip("10.0.1.100")}};
  t.switches = {{"s1", "c1"}};
  t.hosts = {
      {"v1", ip("10.0.1.5"), mac_from_ip(ip("10.0.1.5")), false, true, {{"s1", 1}}},
      {"a1", ip("10.0.0.9"), mac_from_ip(ip("10.0.0.9")), true, false, {{"s1", 2}}},
  };
  return t;
}

inline std::optional<Topology> topology_preset(const std::string& name) {
  if (name == "geni-fig3") return preset_geni_fig3();
  if (name == "single-net") return preset_single_net();
  return std::nullopt;
}

}  // namespace coopsdn
