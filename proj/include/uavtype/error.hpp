#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uavtype {

enum class ErrorCode {
  // ulog_ingest
  BadMagic,
  TruncatedMessage,
  UnknownFieldKind,
  MalformedMessage,
  VersionMismatch,
  ChecksumFailure,
  EmptyLog,
  IoError,
  // feature_catalog
  EmptyCorpus,
  InsufficientFeatures,
  ZeroQuaternion,
  // resampler
  AllEmpty,
  DegenerateRange,
  EmptySplit,
  // rebalancer
  EmptyClass,
  ClassSmallerThanK,
  ContaminatedTestFold,
  // lstm_model
  ShapeMismatch,
  NonFiniteInput,
  InvalidLabel,
  CacheMismatch,
  DivergedLoss,
  // evaluator
  ClassTooSmall,
  LengthMismatch,
  TooFewFolds,
  // synthgen
  InvalidSpec,
  UnsupportedFieldKind,
  // cli
  InvalidConfig,
  NoParsableLogs,
  MissingCache,
};

std::string_view to_string(ErrorCode code);

/// Every failure the library reports is an Error carrying one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace uavtype
