#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace segfuse {

enum class ErrorCode {
  InvalidArgument,
  EmptyInput,
  IncompatibleGrids,
  BothEmpty,
  EmptyGroundTruth,
  EmptySegmentation,
  DegenerateSample,
  IncompleteTable,
  EmptyPhantom,
  ParseError,
  PayloadSizeMismatch,
  ValueOutOfRange,
  IoFailure,
  SchemaError,
  DuplicateCase,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can branch on the kind of failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace segfuse
