#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fibershield {

// Error categories double as CLI exit codes.
enum class ErrorCategory { config = 2, solver = 3, analysis = 4 };

inline std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::solver: return "solver";
    case ErrorCategory::analysis: return "analysis";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& what)
      : std::runtime_error(what), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const noexcept { return category_; }
  // Short machine-readable tag, e.g. "invalid-scenario".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorCategory category_;
  std::string code_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string code, const std::string& what)
      : Error(ErrorCategory::config, std::move(code), what) {}
};

class SolverError : public Error {
 public:
  SolverError(std::string code, const std::string& what)
      : Error(ErrorCategory::solver, std::move(code), what) {}
};

class AnalysisError : public Error {
 public:
  AnalysisError(std::string code, const std::string& what)
      : Error(ErrorCategory::analysis, std::move(code), what) {}
};

}  // namespace fibershield
