#pragma once

#include <stdexcept>
#include <string>

namespace mssf {

enum class ErrorCode {
  InvalidArgument,
  DuplicateConsecutivePoints,
  Overflow,
  InvalidNaturalParams,
  OutOfGrid,
  Separation,
  NotIdentified,
  DegenerateState,
  NumericalUnderflow,
  NotPositiveDefinite,
  AllRunsFailed,
  Config,
  Io,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable failure category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mssf
