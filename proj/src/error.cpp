#include "aeroprint/error.hpp"

namespace aeroprint {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonWatertight:
      return "NonWatertight";
    case ErrorCode::kDegenerateCut:
      return "DegenerateCut";
    case ErrorCode::kInvalidAngle:
      return "InvalidAngle";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kNoEffect:
      return "NoEffect";
    case ErrorCode::kUnknownPlane:
      return "UnknownPlane";
    case ErrorCode::kEmptyInput:
      return "EmptyInput";
    case ErrorCode::kSearchExhausted:
      return "SearchExhausted";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kUnsupportedCommand:
      return "UnsupportedCommand";
    case ErrorCode::kEmptySlice:
      return "EmptySlice";
    case ErrorCode::kNoCapableAgent:
      return "NoCapableAgent";
    case ErrorCode::kNotActive:
      return "NotActive";
    case ErrorCode::kNonFinite:
      return "NonFinite";
    case ErrorCode::kPathComplete:
      return "PathComplete";
    case ErrorCode::kEmptyLog:
      return "EmptyLog";
    case ErrorCode::kIo:
      return "Io";
    case ErrorCode::kConfig:
      return "Config";
    case ErrorCode::kTrackingTimeout:
      return "TrackingTimeout";
  }
  return "Unknown";
}

}  // namespace aeroprint
