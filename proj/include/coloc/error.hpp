#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coloc {

enum class ErrorCode {
  BadMagic,
  UnsupportedVersion,
  DimMismatch,
  NonFiniteValue,
  ParseError,
  DuplicateImageId,
  MissingFile,
  BoxOutOfBounds,
  KernelCountMismatch,
  LengthMismatch,
  TooFewKernels,
  RankOutOfRange,
  ImageTooSmall,
  BoundaryOutOfRange,
  NonPositiveMu,
  UnknownImageId,
  MissingResult,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit path) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace coloc
