#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace cmem {

enum class ErrorCode {
  invalid_parameter,
  invalid_distribution,
  degenerate_distribution,
  grid_mismatch,
  zero_evidence,
  undefined_ratio,
  division_by_zero,
  collapsed_component,
  empty_class,
  all_minus_infinity,
  config,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::invalid_distribution: return "invalid-distribution";
    case ErrorCode::degenerate_distribution: return "degenerate-distribution";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::zero_evidence: return "zero-evidence";
    case ErrorCode::undefined_ratio: return "undefined-ratio";
    case ErrorCode::division_by_zero: return "division-by-zero";
    case ErrorCode::collapsed_component: return "collapsed-component";
    case ErrorCode::empty_class: return "empty-class";
    case ErrorCode::all_minus_infinity: return "all-minus-infinity";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

// Every failure raised by the library. `index` names the offending grid
// point, label, class or iteration when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace cmem
