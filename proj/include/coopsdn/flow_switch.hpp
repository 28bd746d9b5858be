#pragma once

#include <algorithm>
#include <string>
#include <variant>
#include <vector>

#include "coopsdn/errors.hpp"
#include "coopsdn/flow.hpp"

namespace coopsdn {

struct EffectDeliver { PortId port; Packet packet; };
struct EffectPacketIn { Packet packet; PortId ingress; };
struct EffectDropped { Packet packet; };

using SwitchEffect = std::variant<EffectDeliver, EffectPacketIn, EffectDropped>;

struct FlowRemoved {
  FlowEntry entry;
  TimeUs at_us = 0;  // exactly installed_at + hard_timeout
};

// Simulated programmable switch: a priority flow table plus counters.
// Single-owner mutable state; only the harness event loop touches it.
class FlowSwitch {
 public:
  FlowSwitch() = default;
  explicit FlowSwitch(std::string id) : id_(std::move(id)) {}

  const std::string& id() const { return id_; }
  const std::vector<FlowEntry>& table() const { return table_; }
  bool connected() const { return connected_; }

  // Clears the table down to a fresh table-miss entry and resets counters.
  void on_controller_connect(std::uint64_t miss_cookie, TimeUs now_us) {
    table_.clear();
    table_.push_back(make_miss_entry(miss_cookie, now_us));
    connected_ = true;
  }

  // Replaces any existing entry with the same (match, priority).
  void install_flow(FlowEntry entry, TimeUs now_us) {
    entry.installed_at_us = now_us;
    entry.packet_count = 0;
    entry.byte_count = 0;
    for (auto& e : table_) {
      if (e.match == entry.match && e.priority == entry.priority) {
        e = entry;
        return;
      }
    }
    table_.push_back(std::move(entry));
  }

  // Highest priority wins; ties broken by most-recent installed_at_us,
  // then lowest cookie.
  const FlowEntry& lookup(const Packet& p) const {
    if (!has_miss_entry()) throw NoMissEntry(id_);
    const FlowEntry* best = nullptr;
    for (const auto& e : table_) {
      if (!matches(e.match, p)) continue;
      if (!best || wins(e, *best)) best = &e;
    }
    // the miss entry matches everything, so best is never null here
    return *best;
  }

  std::vector<SwitchEffect> process_packet(const Packet& p, PortId ingress,
                                           TimeUs /*now_us*/) {
    const FlowEntry& won = lookup(p);
    auto& counters = const_cast<FlowEntry&>(won);
    counters.packet_count += 1;
    counters.byte_count += p.size_bytes;

    std::vector<SwitchEffect> out;
    if (auto* f = std::get_if<ActionForward>(&won.action)) {
      out.push_back(EffectDeliver{f->port, p});
    } else if (std::holds_alternative<ActionDrop>(won.action)) {
      out.push_back(EffectDropped{p});
    } else {
      out.push_back(EffectPacketIn{p, ingress});
    }
    return out;
  }

  // Removes every timed entry whose deadline has passed. The emitted
  // FlowRemoved carries the exact expiry instant, not `now_us`.
  std::vector<FlowRemoved> expire_flows(TimeUs now_us) {
    std::vector<FlowRemoved> removed;
    auto it = table_.begin();
    while (it != table_.end()) {
      if (it->expires() && it->expiry_us() <= now_us) {
        removed.push_back(FlowRemoved{*it, it->expiry_us()});
        it = table_.erase(it);
      } else {
        ++it;
      }
    }
    return removed;
  }

  bool has_miss_entry() const {
    return std::any_of(table_.begin(), table_.end(), [](const FlowEntry& e) {
      return e.priority == kPriorityMiss && e.match.is_wildcard() &&
             std::holds_alternative<ActionSendToController>(e.action);
    });
  }

 private:
  static bool wins(const FlowEntry& a, const FlowEntry& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.installed_at_us != b.installed_at_us)
      return a.installed_at_us > b.installed_at_us;
    return a.cookie < b.cookie;
  }

  std::string id_;
  std::vector<FlowEntry> table_;
  bool connected_ = false;
};

}  // namespace coopsdn
