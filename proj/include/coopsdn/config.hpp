#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coopsdn/sim.hpp"
#include "coopsdn/topology.hpp"

namespace coopsdn {

// Minimal nested key:value reader for scenario files. Indentation opens a
// section, `#` starts a comment, inline lists are comma-separated.
struct ConfigNode {
  std::string scalar;
  std::map<std::string, ConfigNode> children;

  bool has(const std::string& key) const { return children.count(key) > 0; }
  const ConfigNode* child(const std::string& key) const {
    auto it = children.find(key);
    return it == children.end() ? nullptr : &it->second;
  }
};

inline ConfigNode parse_config_text(const std::string& text) {
  ConfigNode root;
  std::vector<std::pair<int, ConfigNode*>> stack{{-1, &root}};
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    std::size_t indent = line.find_first_not_of(' ');
    if (indent == std::string::npos) continue;  // blank
    std::string body = line.substr(indent);
    while (!body.empty() && (body.back() == ' ' || body.back() == '\r' ||
                             body.back() == '\t'))
      body.pop_back();
    if (body.empty()) continue;
    auto colon = body.find(':');
    if (colon == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key: value'");
    std::string key = body.substr(0, colon);
    std::string value = body.substr(colon + 1);
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());

    while (static_cast<int>(indent) <= stack.back().first) stack.pop_back();
    ConfigNode* parent = stack.back().second;
    ConfigNode& node = parent->children[key];
    node.scalar = value;
    stack.push_back({static_cast<int>(indent), &node});
  }
  return root;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct ScenarioConfig {
  Scenario scenario;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string metrics_path;
  std::string format = "csv";  // csv | structured
  std::string trace_dir;
};

namespace detail {

struct ConfigReader {
  const ConfigNode& root;
  std::vector<std::string>& errors;

  void error(const std::string& path, const std::string& why) {
    errors.push_back(path + ": " + why);
  }

  std::optional<std::int64_t> read_int(const ConfigNode* n,
                                       const std::string& path) {
    if (!n) return std::nullopt;
    try {
      std::size_t used = 0;
      std::int64_t v = std::stoll(n->scalar, &used);
      if (used != n->scalar.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      error(path, "not an integer: '" + n->scalar + "'");
      return std::nullopt;
    }
  }

  std::optional<IpAddress> read_ip(const std::string& s, const std::string& path) {
    auto ip = IpAddress::parse(s);
    if (!ip) error(path, "not an IPv4 address: '" + s + "'");
    return ip;
  }
};

inline std::optional<Topology> read_topology(const ConfigNode& node,
                                             ConfigReader& r) {
  Topology topo;
  bool ok = true;
  auto split_at = [](const std::string& s, char sep)
      -> std::optional<std::pair<std::string, std::string>> {
    auto p = s.find(sep);
    if (p == std::string::npos) return std::nullopt;
    return std::make_pair(s.substr(0, p), s.substr(p + 1));
  };

  if (auto* n = node.child("controllers")) {
    for (const auto& item : split_list(n->scalar)) {
      auto parts = split_at(item, '@');
      if (!parts) { r.error("topology.controllers", "expected id@ip in '" + item + "'"); ok = false; continue; }
      auto ip = r.read_ip(parts->second, "topology.controllers");
      if (!ip) { ok = false; continue; }
      topo.controllers.push_back({parts->first, *ip});
    }
  }
  if (auto* n = node.child("switches")) {
    for (const auto& item : split_list(n->scalar)) {
      auto parts = split_at(item, '>');
      if (!parts) { r.error("topology.switches", "expected id>controller in '" + item + "'"); ok = false; continue; }
      topo.switches.push_back({parts->first, parts->second});
    }
  }
  auto read_host = [&](const std::string& item, const std::string& path,
                       bool attacker) {
    auto at = split_at(item, '@');
    if (!at) { r.error(path, "expected id@ip>switch in '" + item + "'"); ok = false; return; }
    auto rest = split_at(at->second, '>');
    if (!rest) { r.error(path, "expected id@ip>switch in '" + item + "'"); ok = false; return; }
    auto ip = r.read_ip(rest->first, path);
    if (!ip) { ok = false; return; }
    HostSpec h;
    h.id = at->first;
    h.ip = *ip;
    h.mac = mac_from_ip(*ip);
    h.is_attacker = attacker;
    PortId port = 1;
    for (const auto& sw : split_list(rest->second)) {
      // attacker attachments separated by '+', one port per switch
      std::string rem = sw;
      std::size_t plus;
      do {
        plus = rem.find('+');
        std::string one = rem.substr(0, plus);
        h.attach.push_back({one, static_cast<PortId>(attacker ? 2 : port)});
        if (plus != std::string::npos) rem = rem.substr(plus + 1);
      } while (plus != std::string::npos);
    }
    topo.hosts.push_back(std::move(h));
  };
  if (auto* n = node.child("victims"))
    for (const auto& item : split_list(n->scalar))
      read_host(item, "topology.victims", false);
  if (auto* n = node.child("attacker"))
    read_host(n->scalar, "topology.attacker", true);
  if (auto* n = node.child("detectors")) {
    for (const auto& id : split_list(n->scalar)) {
      bool found = false;
      for (auto& h : topo.hosts)
        if (h.id == id) { h.detector_enabled = true; found = true; }
      if (!found) { r.error("topology.detectors", "unknown host " + id); ok = false; }
    }
  }
  if (auto* n = node.child("peers")) {
    for (const auto& item : split_list(n->scalar)) {
      auto parts = split_at(item, '-');
      if (!parts) { r.error("topology.peers", "expected a-b in '" + item + "'"); ok = false; continue; }
      topo.peerings.push_back({parts->first, parts->second, kDefaultPeerSecret});
    }
  }
  if (!ok) return std::nullopt;
  return topo;
}

}  // namespace detail

// Builds a runnable configuration from parsed text, collecting every
// validation failure with the path of the offending field.
inline std::optional<ScenarioConfig> build_scenario_config(
    const ConfigNode& root, std::vector<std::string>& errors) {
  detail::ConfigReader r{root, errors};
  ScenarioConfig cfg;
  Scenario& sc = cfg.scenario;

  // topology: preset or inline
  bool have_topology = false;
  if (auto* n = root.child("preset"); n && !n->scalar.empty()) {
    auto preset = topology_preset(n->scalar);
    if (!preset) {
      r.error("preset", "unknown preset '" + n->scalar + "'");
    } else {
      sc.topology = *preset;
      have_topology = true;
    }
  }
  if (auto* n = root.child("topology")) {
    auto topo = detail::read_topology(*n, r);
    if (topo) {
      sc.topology = *topo;
      have_topology = true;
    }
  }
  if (!have_topology && errors.empty()) r.error("preset", "no topology given");

  if (auto* n = root.child("profile"); n && !n->scalar.empty()) {
    auto prof = latency_profile(n->scalar);
    if (!prof)
      r.error("profile", "unknown profile '" + n->scalar + "'");
    else
      sc.profile = *prof;
  }
  if (auto* lat = root.child("latency")) {
    auto field = [&](const char* key, TimeUs* out) {
      if (auto v = r.read_int(lat->child(key), std::string("latency.") + key)) {
        if (*v < 0)
          r.error(std::string("latency.") + key, "must be >= 0");
        else
          *out = ms_to_us(*v);
      }
    };
    field("link_ms", &sc.profile.link_us);
    field("victim_detect_ms", &sc.profile.victim_detect_us);
    field("controller_handle_ms", &sc.profile.controller_handle_us);
    field("switch_install_ms", &sc.profile.switch_install_us);
    field("peer_share_ms", &sc.profile.peer_share_us);
  }

  if (auto* det = root.child("detector")) {
    if (auto v = r.read_int(det->child("threshold_k"), "detector.threshold_k")) {
      if (*v < 1) r.error("detector.threshold_k", "must be >= 1");
      else sc.detector.threshold_k = static_cast<int>(*v);
    }
    if (auto v = r.read_int(det->child("window_ms"), "detector.window_ms")) {
      if (*v <= 0) r.error("detector.window_ms", "must be > 0");
      else sc.detector.window_us = ms_to_us(*v);
    }
    if (auto* pp = det->child("protected_ports")) {
      sc.protected_ports.clear();
      for (const auto& p : split_list(pp->scalar)) {
        try {
          sc.protected_ports.insert(static_cast<std::uint16_t>(std::stoi(p)));
        } catch (...) {
          r.error("detector.protected_ports", "bad port '" + p + "'");
        }
      }
    }
  }

  // attacker identity comes from the topology
  for (const auto& h : sc.topology.hosts)
    if (h.is_attacker) sc.attack.attacker_ip = h.ip;
  // default: attack every victim on port 22
  for (const auto& h : sc.topology.hosts)
    if (!h.is_attacker) sc.attack.targets.push_back({h.ip, 22});
  sc.attack.start_us = ms_to_us(1000);
  sc.attack.packet_count = 5;

  if (auto* atk = root.child("attack")) {
    if (auto* t = atk->child("targets")) {
      sc.attack.targets.clear();
      for (const auto& item : split_list(t->scalar)) {
        auto colon = item.find(':');
        std::string ip_s = colon == std::string::npos ? item : item.substr(0, colon);
        auto ip = r.read_ip(ip_s, "attack.targets");
        if (!ip) continue;
        std::uint16_t port = 22;
        if (colon != std::string::npos) {
          try { port = static_cast<std::uint16_t>(std::stoi(item.substr(colon + 1))); }
          catch (...) { r.error("attack.targets", "bad port in '" + item + "'"); continue; }
        }
        sc.attack.targets.push_back({*ip, port});
      }
    }
    if (auto v = r.read_int(atk->child("start_ms"), "attack.start_ms"))
      sc.attack.start_us = ms_to_us(*v);
    if (auto v = r.read_int(atk->child("inter_packet_ms"), "attack.inter_packet_ms")) {
      if (*v <= 0) r.error("attack.inter_packet_ms", "must be > 0");
      else sc.attack.inter_packet_us = ms_to_us(*v);
    }
    if (auto v = r.read_int(atk->child("packet_count"), "attack.packet_count")) {
      if (*v < 1) r.error("attack.packet_count", "must be >= 1");
      else sc.attack.packet_count = static_cast<int>(*v);
    }
  }

  if (auto v = r.read_int(root.child("registration_start_ms"), "registration_start_ms"))
    sc.registration_start_us = ms_to_us(*v);
  if (auto v = r.read_int(root.child("forward_timeout_ms"), "forward_timeout_ms"))
    sc.forward_timeout_us = ms_to_us(*v);
  if (auto v = r.read_int(root.child("time_limit_ms"), "time_limit_ms"))
    sc.time_limit_us = ms_to_us(*v);
  if (auto* n = root.child("tamper_alert_passcode"))
    sc.tamper_alert_passcode = (n->scalar == "true" || n->scalar == "1");

  if (auto v = r.read_int(root.child("trials"), "trials")) {
    if (*v < 1) r.error("trials", "must be >= 1");
    else cfg.trials = static_cast<int>(*v);
  }
  if (auto v = r.read_int(root.child("seed"), "seed"))
    cfg.seed = static_cast<std::uint64_t>(*v);

  if (auto* out = root.child("outputs")) {
    if (auto* n = out->child("metrics")) cfg.metrics_path = n->scalar;
    if (auto* n = out->child("format")) {
      if (n->scalar != "csv" && n->scalar != "structured")
        r.error("outputs.format", "must be csv or structured");
      else
        cfg.format = n->scalar;
    }
    if (auto* n = out->child("trace_dir")) cfg.trace_dir = n->scalar;
  }

  if (!errors.empty()) return std::nullopt;
  try {
    sc.validate();
  } catch (const ConfigError& e) {
    errors.push_back(e.what());
    return std::nullopt;
  }
  return cfg;
}

// In-memory preset configuration; `--preset NAME` needs no files.
inline ScenarioConfig preset_scenario_config(const std::string& preset,
                                             const std::string& profile) {
  ScenarioConfig cfg;
  auto topo = topology_preset(preset);
  if (!topo) throw ConfigError("unknown preset '" + preset + "'");
  cfg.scenario.topology = *topo;
  auto prof = latency_profile(profile);
  if (!prof) throw ConfigError("unknown profile '" + profile + "'");
  cfg.scenario.profile = *prof;
  for (const auto& h : cfg.scenario.topology.hosts) {
    if (h.is_attacker)
      cfg.scenario.attack.attacker_ip = h.ip;
    else
      cfg.scenario.attack.targets.push_back({h.ip, 22});
  }
  cfg.scenario.attack.start_us = ms_to_us(1000);
  cfg.scenario.attack.inter_packet_us = ms_to_us(100);
  cfg.scenario.attack.packet_count = 5;
  cfg.scenario.registration_start_us = ms_to_us(200);
  cfg.scenario.validate();
  return cfg;
}

}  // namespace coopsdn
