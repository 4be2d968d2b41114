#pragma once

#include <stdexcept>
#include <string>

namespace amt {

enum class ErrorCode {
  kShapeMismatch,
  kInvalidArgument,
  kBadMagic,
  kVersionMismatch,
  kTruncatedFile,
  kInvalidConfig,
  kMissingParameter,
  kUnexpectedParameter,
  kParameterShape,
  kIo,
  kDecode,
};

const char* error_code_name(ErrorCode code);

/// Exception type thrown by every public entry point of the engine.
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

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace amt
