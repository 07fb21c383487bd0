#pragma once

#include <stdexcept>
#include <string>

namespace gsp {

enum class ErrorCode {
  EmptyInput,
  InvalidArgument,
  DimensionMismatch,
  DegenerateDegree,
  NotSymmetric,
  SizeLimit,
  NonScalable,
  NotConverged,
  CorruptBitstream,
  ParseError,
  Io,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (and the CLI
// exit-code mapping) can branch without parsing the message.
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

}  // namespace gsp
