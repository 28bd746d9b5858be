#pragma once

#include <stdexcept>
#include <string>

namespace coopsdn {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoMissEntry : SimError {
  explicit NoMissEntry(const std::string& sw)
      : SimError("NO_MISS_ENTRY: switch " + sw + " has no table-miss entry") {}
};

struct DuplicateSwitch : SimError {
  explicit DuplicateSwitch(const std::string& sw)
      : SimError("DUPLICATE_SWITCH: " + sw + " already connected") {}
};

struct UnknownSwitch : SimError {
  explicit UnknownSwitch(const std::string& sw)
      : SimError("UNKNOWN_SWITCH: " + sw) {}
};

struct AlreadyRegistered : SimError {
  explicit AlreadyRegistered(const std::string& who)
      : SimError("ALREADY_REGISTERED: " + who) {}
};

struct ConfigError : SimError {
  explicit ConfigError(const std::string& what) : SimError("CONFIG_ERROR: " + what) {}
};

struct ProbeLost : SimError {
  ProbeLost() : SimError("PROBE_LOST: no FlowRemoved within 10x timeout") {}
};

struct TimeLimitExceeded : SimError {
  TimeLimitExceeded() : SimError("TIME_LIMIT_EXCEEDED") {}
};

}  // namespace coopsdn
