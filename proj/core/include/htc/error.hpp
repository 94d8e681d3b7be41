#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace htc {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  numerical_failure,
  cap_exceeded,
  window_too_short,
  grid_mismatch,
  io_failure,
  aborted,
};

std::string_view to_string(ErrorCode code);

/// Base exception for the library. The code is stable and machine readable;
/// the CLI serializes it into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace htc
