#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tvr {

enum class ErrorCode {
  kInvalidArgument,
  kObjectNotFound,
  kMismatchedIds,
  kUnsolvable,
  kSequenceTooLong,
  kPlacementFailure,
  kSamplingFailure,
  kEmptyInput,
  kMalformedRecord,
  kVersionMismatch,
  kChecksumMismatch,
  kIoError,
  kNotFound,
  kUnknownSession,
  kSessionComplete,
  kMalformedAnswer,
  kForbidden,
};

// Stable snake_case name used in structured {code, message} payloads.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tvr
