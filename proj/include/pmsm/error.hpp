#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pmsm {

/// Machine-readable failure class; the CLI maps each to an exit code.
enum class ErrorCategory { config, numeric, domain, diagnostics, io };

std::string_view to_string(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Invalid configuration or mismatched dimensions.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// Non-finite value encountered; carries the offending point index when known.
class NumericError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  explicit NumericError(const std::string& what, std::size_t point_index = npos)
      : Error(ErrorCategory::numeric, what), point_index_(point_index) {}
  std::size_t point_index() const noexcept { return point_index_; }

 private:
  std::size_t point_index_;
};

/// A point lies outside the space-time domain of the problem.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCategory::domain, what) {}
};

/// A sampler or self-check reported an unusable state.
class DiagnosticsError : public Error {
 public:
  explicit DiagnosticsError(const std::string& what) : Error(ErrorCategory::diagnostics, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

}  // namespace pmsm
