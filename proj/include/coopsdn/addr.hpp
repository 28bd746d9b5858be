#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace coopsdn {

// 32-bit IPv4 address with canonical dotted-quad rendering.
struct IpAddress {
  std::uint32_t value = 0;

  auto operator<=>(const IpAddress&) const = default;

  std::string to_string() const {
    return std::to_string((value >> 24) & 0xff) + '.' +
           std::to_string((value >> 16) & 0xff) + '.' +
           std::to_string((value >> 8) & 0xff) + '.' +
           std::to_string(value & 0xff);
  }

  static std::optional<IpAddress> parse(std::string_view s) {
    std::uint32_t acc = 0;
    int octets = 0;
    std::size_t i = 0;
    while (octets < 4) {
      if (i >= s.size() || s[i] < '0' || s[i] > '9') return std::nullopt;
      std::uint32_t oct = 0;
      std::size_t digits = 0;
      while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        oct = oct * 10 + static_cast<std::uint32_t>(s[i] - '0');
        if (oct > 255 || ++digits > 3) return std::nullopt;
        ++i;
      }
      acc = (acc << 8) | oct;
      ++octets;
      if (octets < 4) {
        if (i >= s.size() || s[i] != '.') return std::nullopt;
        ++i;
      }
    }
    if (i != s.size()) return std::nullopt;
    return IpAddress{acc};
  }
};

// 48-bit identifier, colon-hex rendering.
struct MacAddress {
  std::uint64_t value = 0;  // low 48 bits

  auto operator<=>(const MacAddress&) const = default;

  std::string to_string() const {
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(17);
    for (int byte = 5; byte >= 0; --byte) {
      auto b = static_cast<unsigned>((value >> (byte * 8)) & 0xff);
      out += hex[b >> 4];
      out += hex[b & 0xf];
      if (byte) out += ':';
    }
    return out;
  }

  static std::optional<MacAddress> parse(std::string_view s) {
    if (s.size() != 17) return std::nullopt;
    std::uint64_t acc = 0;
    for (int byte = 0; byte < 6; ++byte) {
      std::size_t off = static_cast<std::size_t>(byte) * 3;
      auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
      };
      int hi = nib(s[off]), lo = nib(s[off + 1]);
      if (hi < 0 || lo < 0) return std::nullopt;
      if (byte < 5 && s[off + 2] != ':') return std::nullopt;
      acc = (acc << 8) | static_cast<std::uint64_t>(hi * 16 + lo);
    }
    return MacAddress{acc & 0xffffffffffffULL};
  }
};

}  // namespace coopsdn

template <>
struct std::hash<coopsdn::IpAddress> {
  std::size_t operator()(const coopsdn::IpAddress& a) const noexcept {
    return std::hash<std::uint32_t>{}(a.value);
  }
};
