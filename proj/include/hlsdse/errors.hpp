#pragma once

#include <stdexcept>
#include <string>

namespace hlsdse {

/// Malformed input document (design schema, rule file, front CSV, ...).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structurally well-formed input that violates a domain invariant.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Evaluation backend could not be reached or crashed at the transport
/// level. Distinct from an invalid-design result, which is a regular QoR
/// with valid=false.
struct BackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Replay dataset has no entry for the requested configuration.
struct UnknownConfigError : BackendError {
  using BackendError::BackendError;
};

/// An advisor role call failed after retries (transport, schema, or
/// unsupported role). Callers degrade per their fallback contract.
struct AdvisorError : std::runtime_error {
  AdvisorError(const std::string& role, const std::string& what)
      : std::runtime_error("advisor role '" + role + "': " + what), role(role) {}
  std::string role;
};

}  // namespace hlsdse
