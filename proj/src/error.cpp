#include "error.hpp"

namespace deid {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFileMissing: return "FileMissing";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kOffsetMismatch: return "OffsetMismatch";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kOverlap: return "OverlapError";
    case ErrorCode::kIllFormedSequence: return "IllFormedSequence";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kLabelVocabulary: return "LabelVocabularyError";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kCrossDocumentAnnotation: return "CrossDocumentAnnotation";
    case ErrorCode::kUnknownCategory: return "UnknownCategory";
    case ErrorCode::kOffsetOutOfRange: return "OffsetOutOfRange";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNumericalOverflow: return "NumericalOverflow";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "UnknownError";
}

}  // namespace deid
