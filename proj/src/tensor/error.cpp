#include "amt/error.hpp"

namespace amt {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kTruncatedFile: return "truncated-file";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kMissingParameter: return "missing-parameter";
    case ErrorCode::kUnexpectedParameter: return "unexpected-parameter";
    case ErrorCode::kParameterShape: return "parameter-shape";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kDecode: return "decode";
  }
  return "unknown";
}

}  // namespace amt
