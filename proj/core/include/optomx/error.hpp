#pragma once

#include <stdexcept>
#include <string>

namespace optomx {

// Every failure mode carries one of these codes so callers (and the CLI,
// which maps categories to process exit codes) can react without string
// matching.
enum class ErrorCode {
  // configuration
  BadConfig,
  BadK,
  BadBinCount,
  UnknownKey,
  // data
  ZeroCalibration,
  ConstantImage,
  EmptyPatch,
  EmptyRoi,
  GroupTooSmall,
  SingleClass,
  DegenerateInput,
  DegenerateMatrix,
  FoldDegenerate,
  DimensionMismatch,
  LengthMismatch,
  CenterMismatch,
  ShapeMismatch,
  MissingMetrics,
  PatchTooSmall,
  BadFormat,
  IoFailure,
  ConfigHashMismatch,
  // numeric
  SingularSystem,
  NonFiniteInput,
  DegenerateVariance,
  EmptyMatrix,
};

enum class ErrorCategory { Config, Data, Numeric };

constexpr ErrorCategory category_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::BadConfig:
    case ErrorCode::BadK:
    case ErrorCode::BadBinCount:
    case ErrorCode::UnknownKey:
      return ErrorCategory::Config;
    case ErrorCode::SingularSystem:
    case ErrorCode::NonFiniteInput:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::EmptyMatrix:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace optomx
