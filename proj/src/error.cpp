#include "preassess/error.hpp"

namespace preassess {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::ValidationError: return "VALIDATION_ERROR";
    case ErrorCode::UnknownNode: return "UNKNOWN_NODE";
    case ErrorCode::NotAParent: return "NOT_A_PARENT";
    case ErrorCode::EmptyPerformance: return "EMPTY_PERFORMANCE";
    case ErrorCode::LeafNotUnderParent: return "LEAF_NOT_UNDER_PARENT";
    case ErrorCode::AllZeroWeights: return "ALL_ZERO_WEIGHTS";
    case ErrorCode::ZeroDenominator: return "ZERO_DENOMINATOR";
    case ErrorCode::UnknownLeaf: return "UNKNOWN_LEAF";
    case ErrorCode::InsufficientGroups: return "INSUFFICIENT_GROUPS";
    case ErrorCode::EmptyCounts: return "EMPTY_COUNTS";
    case ErrorCode::UnknownAttribute: return "UNKNOWN_ATTRIBUTE";
    case ErrorCode::UnknownFeature: return "UNKNOWN_FEATURE";
    case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::MissingAttribute: return "MISSING_ATTRIBUTE";
    case ErrorCode::DegenerateSplit: return "DEGENERATE_SPLIT";
    case ErrorCode::SessionComplete: return "SESSION_COMPLETE";
    case ErrorCode::SessionNotComplete: return "SESSION_NOT_COMPLETE";
    case ErrorCode::LeafNotQueued: return "LEAF_NOT_QUEUED";
    case ErrorCode::AlreadyRecordedDifferently: return "ALREADY_RECORDED_DIFFERENTLY";
    case ErrorCode::NoQuizDefined: return "NO_QUIZ_DEFINED";
    case ErrorCode::AnswerCountMismatch: return "ANSWER_COUNT_MISMATCH";
    case ErrorCode::IndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case ErrorCode::UnknownSession: return "UNKNOWN_SESSION";
    case ErrorCode::DuplicateRow: return "DUPLICATE_ROW";
    case ErrorCode::UnknownLabel: return "UNKNOWN_LABEL";
    case ErrorCode::SequenceGap: return "SEQUENCE_GAP";
    case ErrorCode::StorageFailure: return "STORAGE_FAILURE";
    case ErrorCode::CorruptLog: return "CORRUPT_LOG";
    case ErrorCode::BindFailure: return "BIND_FAILURE";
    case ErrorCode::InvalidGraph: return "INVALID_GRAPH";
    case ErrorCode::FixtureMissing: return "FIXTURE_MISSING";
    case ErrorCode::BadRequest: return "BAD_REQUEST";
    case ErrorCode::NotFound: return "NOT_FOUND";
  }
  return "UNKNOWN";
}

}  // namespace preassess
