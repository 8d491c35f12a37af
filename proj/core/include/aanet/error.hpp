#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aanet {

enum class ErrorCode {
  kIo,
  kBadMagic,
  kVersionMismatch,
  kLengthMismatch,
  kNonFinite,
  kBadDimensions,
  kShapeMismatch,
  kEmptyInput,
  kNotFound,
  kInvalidArgument,
  kParse,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library surfaces as an Error; code() tells
/// callers which of the distinct failure modes occurred.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// Message without the leading error-code tag.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace aanet
