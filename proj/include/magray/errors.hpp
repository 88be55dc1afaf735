#pragma once

#include <stdexcept>
#include <string>

namespace magray {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated an operation's stated precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

/// A kernel constructor received generators without the boundary-vanishing
/// certificate.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Scenario failed validation (positivity or strict magnetic convexity).
class ScenarioError : public Error {
 public:
  using Error::Error;
};

/// Integration left the analytically extended chart.
class DomainEscapeError : public Error {
 public:
  using Error::Error;
};

/// A ray did not reach the boundary within the arclength budget.
class TrappedRayError : public Error {
 public:
  using Error::Error;
};

class GlancingError : public Error {
 public:
  using Error::Error;
};

/// A finite-difference stencil would leave the manifold.
class StencilError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document; `line` is 0 when unknown.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace magray
