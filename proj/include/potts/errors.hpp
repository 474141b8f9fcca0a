#pragma once

#include <stdexcept>
#include <string>

namespace potts {

// Rejected input: out-of-range parameter, loop edge, malformed file, ...
// Mapped to exit code 2 by the CLI.
struct ParameterError : std::runtime_error {
  explicit ParameterError(const std::string& what) : std::runtime_error(what) {}
};

// An enumeration budget was exceeded.  The message names the limit that was
// hit.  Mapped to exit code 3 by the CLI.  Budgets are never silently
// downgraded to sampling.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace potts
