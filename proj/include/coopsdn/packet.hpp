#pragma once

#include <cstdint>
#include <variant>

#include "coopsdn/addr.hpp"
#include "coopsdn/wire.hpp"

namespace coopsdn {

// Virtual time in integer microseconds; config and reports use milliseconds.
using TimeUs = std::int64_t;

constexpr TimeUs ms_to_us(std::int64_t ms) { return ms * 1000; }

constexpr std::uint32_t kMinPacketBytes = 64;

struct ArpRequest { IpAddress target; bool operator==(const ArpRequest&) const = default; };
struct ArpReply {
  IpAddress target;
  MacAddress mac;
  bool operator==(const ArpReply&) const = default;
};
struct IpData { bool operator==(const IpData&) const = default; };
struct ControlPayload {
  WireMessage msg;
  bool operator==(const ControlPayload&) const = default;
};

// Simulated L2/L3 datagram. ARP packets carry no WireMessage; CONTROL
// packets carry exactly one (both enforced by the variant).
struct Packet {
  IpAddress src_ip;
  IpAddress dst_ip;
  MacAddress src_mac;
  MacAddress dst_mac;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::variant<ArpRequest, ArpReply, IpData, ControlPayload> kind = IpData{};
  std::uint32_t size_bytes = kMinPacketBytes;

  bool operator==(const Packet&) const = default;

  bool is_arp() const {
    return std::holds_alternative<ArpRequest>(kind) ||
           std::holds_alternative<ArpReply>(kind);
  }
  const WireMessage* control() const {
    auto* c = std::get_if<ControlPayload>(&kind);
    return c ? &c->msg : nullptr;
  }
};

}  // namespace coopsdn
