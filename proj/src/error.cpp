#include "locomp/error.hpp"

namespace locomp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonDivisible: return "NonDivisible";
    case ErrorCode::InvalidBlockSizes: return "InvalidBlockSizes";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UpscaleNotSupported: return "UpscaleNotSupported";
    case ErrorCode::CropTooLarge: return "CropTooLarge";
    case ErrorCode::StrideIncompatible: return "StrideIncompatible";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DigestMismatch: return "DigestMismatch";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnsupportedImage: return "UnsupportedImage";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::MissingFile:
      return ErrorClass::Io;
    case ErrorCode::BadMagic:
    case ErrorCode::VersionUnsupported:
    case ErrorCode::LengthMismatch:
    case ErrorCode::DigestMismatch:
    case ErrorCode::SchemaViolation:
    case ErrorCode::UnsupportedImage:
      return ErrorClass::Format;
    default:
      return ErrorClass::Validation;
  }
}

}  // namespace locomp
