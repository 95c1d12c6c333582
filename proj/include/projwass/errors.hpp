#pragma once

#include <stdexcept>
#include <string>

namespace projwass {

// Invalid user-facing input: bad weights, malformed files, out-of-range
// parameters. CLI exit code 2.
class input_error : public std::runtime_error {
 public:
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative solver failed to reach its tolerance. Carries a human-readable
// residual summary. CLI exit code 3.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated internal contract (unbounded face LP, singular system on an
// interior plan). Indicates a bug or an input outside every documented
// precondition.
class internal_error : public std::logic_error {
 public:
  explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace projwass
