#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coopsdn/errors.hpp"
#include "coopsdn/packet.hpp"
#include "coopsdn/wire.hpp"

namespace coopsdn {

// Threshold-in-window detector standing in for application-level attack
// detection; k=1 models instant detection.
struct DetectorConfig {
  int threshold_k = 1;
  TimeUs window_us = ms_to_us(1000);
};

constexpr std::uint16_t kVictimPort = 5001;

// Victim agent: registers with its controller, stores the issued passcode,
// watches arrivals on protected ports and raises at most one alert per
// attacker per run.
class VictimAgent {
 public:
  VictimAgent() = default;
  VictimAgent(std::string id, IpAddress ip, IpAddress controller_ip,
              DetectorConfig detector, std::set<std::uint16_t> protected_ports,
              bool detector_enabled = true)
      : id_(std::move(id)),
        ip_(ip),
        controller_ip_(controller_ip),
        detector_(detector),
        protected_ports_(std::move(protected_ports)),
        detector_enabled_(detector_enabled) {}

  const std::string& id() const { return id_; }
  IpAddress ip() const { return ip_; }
  bool registered() const { return passcode_.has_value(); }
  std::optional<std::uint64_t> passcode() const { return passcode_; }
  int suppressed_alerts() const { return suppressed_alerts_; }

  WireMessage victim_register(TimeUs now_us) {
    if (passcode_) throw AlreadyRegistered(id_);
    WireMessage m;
    m.msg_type = MsgType::kRegister;
    m.sender_ip = ip_;
    m.sender_port = kVictimPort;
    m.timestamp_ms = now_us / 1000;
    return m;
  }

  void on_register_ack(const WireMessage& ack) {
    if (ack.msg_type == MsgType::kRegisterAck && ack.passcode)
      passcode_ = *ack.passcode;
  }

  // Records the arrival and returns an ALERT when the detector fires.
  std::optional<WireMessage> victim_on_packet(const Packet& p, TimeUs now_us) {
    observed_[p.src_ip].push_back(now_us);
    if (!detector_enabled_) return std::nullopt;
    if (!protected_ports_.count(p.dst_port)) return std::nullopt;
    if (alerted_.count(p.src_ip)) return std::nullopt;

    const auto& times = observed_[p.src_ip];
    TimeUs window_start = now_us - detector_.window_us;
    int count = 0;
    for (auto t : times)
      if (t >= window_start) ++count;
    if (count < detector_.threshold_k) return std::nullopt;

    if (!passcode_) {
      // NOT_REGISTERED: detection fired before the passcode arrived
      ++suppressed_alerts_;
      return std::nullopt;
    }
    alerted_.insert(p.src_ip);
    WireMessage m;
    m.msg_type = MsgType::kAlert;
    m.sender_ip = ip_;
    m.sender_port = kVictimPort;
    m.timestamp_ms = now_us / 1000;
    m.passcode = passcode_;
    m.attacker_ip = p.src_ip;
    return m;
  }

 private:
  std::string id_;
  IpAddress ip_;
  IpAddress controller_ip_;
  DetectorConfig detector_;
  std::set<std::uint16_t> protected_ports_{22};
  bool detector_enabled_ = true;
  std::optional<std::uint64_t> passcode_;
  std::map<IpAddress, std::vector<TimeUs>> observed_;
  std::set<IpAddress> alerted_;
  int suppressed_alerts_ = 0;
};

struct AttackTarget {
  IpAddress victim_ip;
  std::uint16_t dst_port = 22;
  TimeUs start_offset_us = 0;  // staggered start relative to the schedule
};

struct AttackSchedule {
  IpAddress attacker_ip;
  std::vector<AttackTarget> targets;
  TimeUs start_us = 0;
  TimeUs inter_packet_us = ms_to_us(100);
  int packet_count = 1;  // per target

  void validate() const {
    if (inter_packet_us <= 0) throw ConfigError("attack.inter_packet_ms must be > 0");
    if (packet_count < 1) throw ConfigError("attack.packet_count must be >= 1");
    if (targets.empty()) throw ConfigError("attack.targets must not be empty");
  }
};

struct ScheduledPacket {
  TimeUs at_us;
  Packet packet;
};

// Expands a schedule into the emitted packet stream, targets interleaved
// round-robin.
inline std::vector<ScheduledPacket> attacker_run(const AttackSchedule& s) {
  s.validate();
  std::vector<ScheduledPacket> out;
  out.reserve(static_cast<std::size_t>(s.packet_count) * s.targets.size());
  for (int i = 0; i < s.packet_count; ++i) {
    for (const auto& target : s.targets) {
      Packet p;
      p.src_ip = s.attacker_ip;
      p.dst_ip = target.victim_ip;
      p.dst_port = target.dst_port;
      p.src_port = 40000;
      p.kind = IpData{};
      out.push_back(ScheduledPacket{
          s.start_us + target.start_offset_us + i * s.inter_packet_us, p});
    }
  }
  return out;
}

}  // namespace coopsdn
