#pragma once

#include <stdexcept>
#include <string>

namespace igno {

// Every throwing site tags the failure with the component that detected it,
// so callers (CLI, tests) can route on the prefix without parsing prose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error("shape error: " + msg) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("io error: " + msg) {}
};

// Raised when a numeric primitive produces a non-finite value. `where`
// identifies the offending primitive (layer name, loss term, solver stage).
struct NumericError : Error {
  std::string where;
  NumericError(const std::string& where_, const std::string& msg)
      : Error("numeric error in " + where_ + ": " + msg), where(where_) {}
};

}  // namespace igno
