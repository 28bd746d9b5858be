#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/select.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <optional>
#include <string>

#include "coopsdn/errors.hpp"
#include "coopsdn/wire.hpp"

namespace coopsdn {

// Loopback UDP adapter for the control plane: carries wire-format lines
// between victims, controllers and peers in integration mode. Metric
// definitions are unchanged; only the in-memory links are swapped out.
class UdpEndpoint {
 public:
  UdpEndpoint() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
    if (fd_ < 0) throw SimError("socket() failed");
  }
  explicit UdpEndpoint(std::uint16_t bind_port) : UdpEndpoint() {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(bind_port);
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
      throw SimError("bind() failed on port " + std::to_string(bind_port));
  }
  ~UdpEndpoint() {
    if (fd_ >= 0) ::close(fd_);
  }
  UdpEndpoint(const UdpEndpoint&) = delete;
  UdpEndpoint& operator=(const UdpEndpoint&) = delete;
  UdpEndpoint(UdpEndpoint&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }

  std::uint16_t bound_port() const {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
  }

  void send_message(const WireMessage& msg, std::uint16_t dest_port) const {
    std::string line = encode(msg);
    sockaddr_in dest{};
    dest.sin_family = AF_INET;
    dest.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    dest.sin_port = htons(dest_port);
    ::sendto(fd_, line.data(), line.size(), 0,
             reinterpret_cast<const sockaddr*>(&dest), sizeof(dest));
  }

  // Blocks up to timeout_ms; returns nullopt on timeout or undecodable
  // datagram.
  std::optional<WireMessage> receive(int timeout_ms,
                                     std::string* error = nullptr) const {
    fd_set rd;
    FD_ZERO(&rd);
    FD_SET(fd_, &rd);
    timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
    if (::select(fd_ + 1, &rd, nullptr, nullptr, &tv) <= 0) {
      if (error) *error = "timeout";
      return std::nullopt;
    }
    char buf[1024];
    ssize_t n = ::recvfrom(fd_, buf, sizeof(buf), 0, nullptr, nullptr);
    if (n <= 0) {
      if (error) *error = "recv failed";
      return std::nullopt;
    }
    return decode(std::string_view(buf, static_cast<std::size_t>(n)), error);
  }

 private:
  int fd_;
};

}  // namespace coopsdn
