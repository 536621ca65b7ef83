#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arthur {

enum class ErrorCode {
  invalid_pose,
  unresolved_anchor,
  anchor_cycle,
  not_found,
  validation,
  unknown_id,
  type_mismatch,
  dangling_reference,
  phase,
  precedence,
  immutable,
  cycle,
  transport,
  parse,
  load,
  unsupported_kind,
  unknown_agent,
  invalid_argument,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the project; `code()` tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  /// Message without the error-code prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace arthur
