#pragma once

#include <stdexcept>
#include <string>

namespace dash {

// Bad argument values: tokens outside the vocab, invalid partitions,
// nonpositive temperatures, malformed configs.
struct InputError : std::invalid_argument {
  explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Structural limits exceeded: context-window overflow, enumeration blowup.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// A strictly on-policy estimator was handed a batch generated by different
// parameters than the ones being differentiated.
struct OnPolicyViolation : std::logic_error {
  explicit OnPolicyViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace dash
