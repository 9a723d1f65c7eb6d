#include "pmsm/error.hpp"

namespace pmsm {

std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::diagnostics: return "diagnostics";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

}  // namespace pmsm
