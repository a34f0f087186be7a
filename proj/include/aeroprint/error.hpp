#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aeroprint {

enum class ErrorCode {
  kNonWatertight,
  kDegenerateCut,
  kInvalidAngle,
  kInvalidArgument,
  kNoEffect,
  kUnknownPlane,
  kEmptyInput,
  kSearchExhausted,
  kParseError,
  kUnsupportedCommand,
  kEmptySlice,
  kNoCapableAgent,
  kNotActive,
  kNonFinite,
  kPathComplete,
  kEmptyLog,
  kIo,
  kConfig,
  kTrackingTimeout,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI exit path) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace aeroprint
