#ifndef MDOOD_ERROR_HPP
#define MDOOD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdood {

enum class ErrorCode {
  // format / data
  BadMagic,
  UnsupportedVersion,
  VersionMismatch,
  BadHeader,
  TruncatedPayload,
  TrailingBytes,
  NonFiniteValue,
  InvalidLabel,
  IoFailure,
  DimensionMismatch,
  MissingLogits,
  MissingLabels,
  OodInTrainingSet,
  ClassTooSmall,
  MissingBackground,
  LabelOutOfRange,
  OneClassOnly,
  EmptyInput,
  EmptyLogits,
  InsufficientSamples,
  BadContamination,
  BadConfig,
  // numerical
  AsymmetricInput,
  NotFactorizable,
};

inline std::string_view to_string(ErrorCode code) noexcept;

/// True for failures of the numerical core rather than of the input data.
constexpr bool is_numerical(ErrorCode code) noexcept {
  return code == ErrorCode::AsymmetricInput || code == ErrorCode::NotFactorizable;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::TrailingBytes: return "TrailingBytes";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingLogits: return "MissingLogits";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::OodInTrainingSet: return "OodInTrainingSet";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::MissingBackground: return "MissingBackground";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::OneClassOnly: return "OneClassOnly";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyLogits: return "EmptyLogits";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::BadContamination: return "BadContamination";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::NotFactorizable: return "NotFactorizable";
  }
  return "Unknown";
}

}  // namespace mdood

#endif  // MDOOD_ERROR_HPP
