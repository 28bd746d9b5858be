#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "coopsdn/packet.hpp"

namespace coopsdn {

using PortId = std::uint16_t;

// Port 0 is reserved for the controller channel on every switch.
constexpr PortId kControllerPort = 0;

// Priority bands: miss = 0, forwarding = 100, drop = 200, so an installed
// drop entry always beats a forward entry which always beats the miss.
constexpr std::uint32_t kPriorityMiss = 0;
constexpr std::uint32_t kPriorityForward = 100;
constexpr std::uint32_t kPriorityDrop = 200;

// Match on source and/or destination IP; all-absent matches every packet.
struct FlowMatch {
  std::optional<IpAddress> src_ip;
  std::optional<IpAddress> dst_ip;

  bool operator==(const FlowMatch&) const = default;

  bool is_wildcard() const { return !src_ip && !dst_ip; }

  std::string to_string() const {
    if (is_wildcard()) return "*";
    std::string s;
    if (src_ip) s += "src=" + src_ip->to_string();
    if (dst_ip) {
      if (!s.empty()) s += ',';
      s += "dst=" + dst_ip->to_string();
    }
    return s;
  }
};

inline bool matches(const FlowMatch& m, const Packet& p) {
  if (m.src_ip && *m.src_ip != p.src_ip) return false;
  if (m.dst_ip && *m.dst_ip != p.dst_ip) return false;
  return true;
}

struct ActionForward { PortId port; bool operator==(const ActionForward&) const = default; };
struct ActionDrop { bool operator==(const ActionDrop&) const = default; };
struct ActionSendToController { bool operator==(const ActionSendToController&) const = default; };

using FlowAction = std::variant<ActionForward, ActionDrop, ActionSendToController>;

inline std::string to_string(const FlowAction& a) {
  if (auto* f = std::get_if<ActionForward>(&a))
    return "FORWARD(" + std::to_string(f->port) + ")";
  if (std::holds_alternative<ActionDrop>(a)) return "DROP";
  return "CONTROLLER";
}

struct FlowEntry {
  FlowMatch match;
  FlowAction action = ActionSendToController{};
  std::uint32_t priority = 0;
  TimeUs hard_timeout_us = 0;  // 0 = permanent
  TimeUs installed_at_us = 0;
  std::uint64_t cookie = 0;

  // counters
  std::uint64_t packet_count = 0;
  std::uint64_t byte_count = 0;

  bool expires() const { return hard_timeout_us > 0; }
  TimeUs expiry_us() const { return installed_at_us + hard_timeout_us; }

  std::string describe() const {
    return "prio=" + std::to_string(priority) + " match=" + match.to_string() +
           " action=" + to_string(action) + " cookie=" + std::to_string(cookie);
  }
};

inline FlowEntry make_miss_entry(std::uint64_t cookie, TimeUs now_us) {
  FlowEntry e;
  e.match = FlowMatch{};
  e.action = ActionSendToController{};
  e.priority = kPriorityMiss;
  e.hard_timeout_us = 0;
  e.installed_at_us = now_us;
  e.cookie = cookie;
  return e;
}

}  // namespace coopsdn
