#pragma once

#include <stdexcept>
#include <string>

namespace spdcqkd {

// Invalid inputs are reported with std::invalid_argument. The two types below
// cover the domain-specific failure modes that are not argument errors.

/// The state carries no two-qubit correlations, so no preferred measurement
/// direction exists (e.g. the maximally mixed state).
class NoSignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Devetak-Winter rate is zero, so a key-rate threshold is undefined.
class NoSecurityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spdcqkd
