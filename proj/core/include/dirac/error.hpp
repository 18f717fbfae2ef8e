#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dirac {

enum class ErrorKind {
  structural,    // shape or dimension mismatch between operands
  resolution,    // grid too coarse for the requested object
  degenerate,    // projector or transform undefined (E = 0, empty projection)
  domain,        // argument outside the mathematical domain (t < 0, outside cone, ...)
  budget,        // periodic wraparound budget violated
  configuration, // inconsistent run parameters (non-divisor step, ...)
  feasibility,   // dense oracle above its size cap
  sampling,      // time series too coarse for the requested analysis
  validation,    // scenario file rejected
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

} // namespace dirac
