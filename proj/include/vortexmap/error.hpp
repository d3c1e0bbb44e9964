#pragma once

#include <stdexcept>
#include <string>

namespace vxm {

/// Raised when a caller breaks an operation's preconditions (shape mismatch,
/// non-finite input, empty buffer, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Poisson solve failed to converge or diverged.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

}  // namespace vxm
