#pragma once

#include <stdexcept>
#include <string>

namespace dime {

/// Malformed or out-of-range input (bad documents, invalid ids, p/u outside [0,1]).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A request that is well-formed but too large for the instance: K > N,
/// enumeration caps exceeded.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Operation not permitted in the current state (exhausted session,
/// non-monotone influence, unknown tree leaf).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace dime
