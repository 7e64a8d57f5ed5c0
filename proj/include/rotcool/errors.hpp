#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rotcool {

/// Machine-readable failure classes. The CLI maps each one to its own exit code.
enum class ErrorCategory {
  InvalidParams,
  Domain,
  DegenerateTransition,
  QuadratureFailure,
  StiffnessFailure,
  NonUniqueSteadyState,
  Io,
  Config,
};

constexpr std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::InvalidParams: return "InvalidParams";
    case ErrorCategory::Domain: return "DomainError";
    case ErrorCategory::DegenerateTransition: return "DegenerateTransition";
    case ErrorCategory::QuadratureFailure: return "QuadratureFailure";
    case ErrorCategory::StiffnessFailure: return "StiffnessFailure";
    case ErrorCategory::NonUniqueSteadyState: return "NonUniqueSteadyState";
    case ErrorCategory::Io: return "IOError";
    case ErrorCategory::Config: return "ConfigError";
  }
  return "Unknown";
}

constexpr int exit_code(ErrorCategory c) noexcept { return 2 + static_cast<int>(c); }

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(std::string(category_name(category)) + ": " + what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace rotcool
