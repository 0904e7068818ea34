#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace preassess {

/// Closed set of error conditions surfaced by every module. The string form
/// (see code_name) is stable and is what crosses the CLI and HTTP boundaries.
enum class ErrorCode {
  ParseError,
  ValidationError,
  UnknownNode,
  NotAParent,
  EmptyPerformance,
  LeafNotUnderParent,
  AllZeroWeights,
  ZeroDenominator,
  UnknownLeaf,
  InsufficientGroups,
  EmptyCounts,
  UnknownAttribute,
  UnknownFeature,
  EmptyDataset,
  MissingAttribute,
  DegenerateSplit,
  SessionComplete,
  SessionNotComplete,
  LeafNotQueued,
  AlreadyRecordedDifferently,
  NoQuizDefined,
  AnswerCountMismatch,
  IndexOutOfRange,
  UnknownSession,
  DuplicateRow,
  UnknownLabel,
  SequenceGap,
  StorageFailure,
  CorruptLog,
  BindFailure,
  InvalidGraph,
  FixtureMissing,
  BadRequest,
  NotFound,
};

/// "LEAF_NOT_QUEUED" style name for a code.
std::string_view code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return preassess::code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace preassess
