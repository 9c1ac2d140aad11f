#pragma once

#include <stdexcept>
#include <string>

namespace hdgmg {

enum class ErrorCode {
  invalid_argument,
  cannot_coarsen,
  numerical_breakdown,
  unsupported_order,
  dimension_mismatch,
  configuration,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; the C API maps it onto status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hdgmg
