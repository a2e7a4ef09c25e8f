#include "coloc/error.hpp"

namespace coloc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateImageId: return "DuplicateImageId";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::BoxOutOfBounds: return "BoxOutOfBounds";
    case ErrorCode::KernelCountMismatch: return "KernelCountMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewKernels: return "TooFewKernels";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::BoundaryOutOfRange: return "BoundaryOutOfRange";
    case ErrorCode::NonPositiveMu: return "NonPositiveMu";
    case ErrorCode::UnknownImageId: return "UnknownImageId";
    case ErrorCode::MissingResult: return "MissingResult";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace coloc
