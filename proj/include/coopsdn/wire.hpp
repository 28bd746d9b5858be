#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "coopsdn/addr.hpp"

namespace coopsdn {

enum class MsgType { kRegister, kRegisterAck, kAlert, kPeerShare };

inline const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::kRegister: return "REGISTER";
    case MsgType::kRegisterAck: return "REGISTER_ACK";
    case MsgType::kAlert: return "ALERT";
    case MsgType::kPeerShare: return "PEER_SHARE";
  }
  return "?";
}

constexpr int kProtocolVersion = 1;

// Control message exchanged between victims, controllers and peers.
// One message per line on the wire:
//   v<version> <MSG_TYPE> <sender_ip> <sender_port> <timestamp_ms> <passcode_hex|-> [attacker_ip]
struct WireMessage {
  MsgType msg_type = MsgType::kRegister;
  IpAddress sender_ip;
  std::uint16_t sender_port = 0;
  std::int64_t timestamp_ms = 0;
  std::optional<std::uint64_t> passcode;   // absent for REGISTER
  std::optional<IpAddress> attacker_ip;    // ALERT / PEER_SHARE only
  int protocol_version = kProtocolVersion;

  bool operator==(const WireMessage&) const = default;
};

inline std::string to_hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

inline std::string encode(const WireMessage& m) {
  std::string line = "v" + std::to_string(m.protocol_version);
  line += ' ';
  line += to_string(m.msg_type);
  line += ' ';
  line += m.sender_ip.to_string();
  line += ' ';
  line += std::to_string(m.sender_port);
  line += ' ';
  line += std::to_string(m.timestamp_ms);
  line += ' ';
  line += m.passcode ? to_hex(*m.passcode) : std::string("-");
  if (m.attacker_ip) {
    line += ' ';
    line += m.attacker_ip->to_string();
  }
  line += '\n';
  return line;
}

// Decodes one line; a trailing '\n' is accepted and ignored.
// Returns nullopt and fills *error on malformed input, a missing required
// field, or an unknown protocol version.
inline std::optional<WireMessage> decode(std::string_view line,
                                         std::string* error = nullptr) {
  auto fail = [&](std::string why) -> std::optional<WireMessage> {
    if (error) *error = "DECODE_ERROR: " + std::move(why);
    return std::nullopt;
  };
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  std::vector<std::string_view> tok;
  std::size_t pos = 0;
  while (pos < line.size()) {
    std::size_t sp = line.find(' ', pos);
    if (sp == std::string_view::npos) sp = line.size();
    if (sp == pos) return fail("empty field");
    tok.push_back(line.substr(pos, sp - pos));
    pos = sp + 1;
  }
  if (tok.size() < 6) return fail("truncated message");
  if (tok.size() > 7) return fail("trailing fields");

  WireMessage m;
  if (tok[0].size() < 2 || tok[0][0] != 'v') return fail("bad version field");
  if (tok[0] != "v1") return fail("unknown protocol_version " + std::string(tok[0]));
  m.protocol_version = 1;

  if (tok[1] == "REGISTER") m.msg_type = MsgType::kRegister;
  else if (tok[1] == "REGISTER_ACK") m.msg_type = MsgType::kRegisterAck;
  else if (tok[1] == "ALERT") m.msg_type = MsgType::kAlert;
  else if (tok[1] == "PEER_SHARE") m.msg_type = MsgType::kPeerShare;
  else return fail("unknown msg_type " + std::string(tok[1]));

  auto ip = IpAddress::parse(tok[2]);
  if (!ip) return fail("bad sender_ip");
  m.sender_ip = *ip;

  auto parse_u64 = [](std::string_view s, int base, std::uint64_t* out) {
    if (s.empty()) return false;
    std::uint64_t acc = 0;
    for (char c : s) {
      int d;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (base == 16 && c >= 'a' && c <= 'f') d = c - 'a' + 10;
      else return false;
      if (d >= base) return false;
      if (acc > (UINT64_MAX - static_cast<std::uint64_t>(d)) / static_cast<std::uint64_t>(base))
        return false;
      acc = acc * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(d);
    }
    *out = acc;
    return true;
  };

  std::uint64_t port = 0;
  if (!parse_u64(tok[3], 10, &port) || port > 0xffff) return fail("bad sender_port");
  m.sender_port = static_cast<std::uint16_t>(port);

  std::uint64_t ts = 0;
  if (!parse_u64(tok[4], 10, &ts)) return fail("bad timestamp_ms");
  m.timestamp_ms = static_cast<std::int64_t>(ts);

  if (tok[5] != "-") {
    std::uint64_t pc = 0;
    if (!parse_u64(tok[5], 16, &pc)) return fail("bad passcode");
    m.passcode = pc;
  }

  if (tok.size() == 7) {
    auto atk = IpAddress::parse(tok[6]);
    if (!atk) return fail("bad attacker_ip");
    m.attacker_ip = *atk;
  }

  switch (m.msg_type) {
    case MsgType::kAlert:
    case MsgType::kPeerShare:
      if (!m.attacker_ip) return fail("missing attacker_ip");
      break;
    case MsgType::kRegisterAck:
      if (!m.passcode) return fail("missing passcode");
      if (m.attacker_ip) return fail("unexpected attacker_ip");
      break;
    case MsgType::kRegister:
      if (m.passcode) return fail("unexpected passcode in REGISTER");
      if (m.attacker_ip) return fail("unexpected attacker_ip");
      break;
  }
  return m;
}

}  // namespace coopsdn
