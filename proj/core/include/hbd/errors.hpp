#pragma once

#include <stdexcept>
#include <string>

namespace hbd {

// Base class for all simulator errors. kind() is the stable machine-readable
// tag used in CLI error reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error("invalid_argument", what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::string kind = "validation_error")
      : Error(std::move(kind), what) {}
};

// The foliation gradient is not timelike at a point, or a trajectory left the
// validity region.
class ValidityBreach : public Error {
 public:
  explicit ValidityBreach(const std::string& what) : Error("validity_breach", what) {}
};

// The density at a configuration fell below the node threshold.
class NodeProximity : public Error {
 public:
  NodeProximity(const std::string& what, double s) : Error("node_proximity", what), s_(s) {}
  double s() const noexcept { return s_; }

 private:
  double s_;
};

// A bilinear that must be real came out with a sizeable imaginary part.
class InternalConsistencyError : public Error {
 public:
  explicit InternalConsistencyError(const std::string& what)
      : Error("internal_consistency", what) {}
};

class EnvelopeBreach : public Error {
 public:
  explicit EnvelopeBreach(const std::string& what) : Error("envelope_breach", what) {}
};

class BoundaryLeak : public Error {
 public:
  explicit BoundaryLeak(const std::string& what) : Error("boundary_leak", what) {}
};

}  // namespace hbd
