#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace locomp {

enum class ErrorCode {
  // validation
  InvalidArgument,
  NonDivisible,
  InvalidBlockSizes,
  DimensionMismatch,
  UpscaleNotSupported,
  CropTooLarge,
  StrideIncompatible,
  // I/O
  Io,
  MissingFile,
  // format
  BadMagic,
  VersionUnsupported,
  LengthMismatch,
  DigestMismatch,
  SchemaViolation,
  UnsupportedImage,
};

enum class ErrorClass { Validation, Io, Format };

std::string_view to_string(ErrorCode code) noexcept;
ErrorClass classify(ErrorCode code) noexcept;

/// All library failures are reported as Error; the code names the violated
/// precondition or the broken format rule.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace locomp
