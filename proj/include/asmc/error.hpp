#ifndef ASMC_ERROR_HPP
#define ASMC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace asmc {

/// Base class for all library errors. `kind()` is a stable machine-readable tag
/// used by the CLI when it reports failures as JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& message) : Error("dimension_mismatch", message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message) : Error("invalid_argument", message) {}
};

class NonConvergence : public Error {
 public:
  explicit NonConvergence(const std::string& message) : Error("non_convergence", message) {}
};

/// A trajectory left the guard radius or produced a non-finite value.
class Divergence : public Error {
 public:
  explicit Divergence(const std::string& message) : Error("divergence", message) {}
};

class WeightCollapse : public Error {
 public:
  explicit WeightCollapse(const std::string& message) : Error("weight_collapse", message) {}
};

class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& message) : Error("budget_exceeded", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

class FixtureError : public Error {
 public:
  explicit FixtureError(const std::string& message) : Error("fixture_error", message) {}
};

}  // namespace asmc

#endif  // ASMC_ERROR_HPP
