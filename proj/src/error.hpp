#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deid {

// One code per failure kind the library can report. The C API maps these
// one-to-one onto deid_status values, so keep the order in sync with deid.h.
enum class ErrorCode {
  kInvalidArgument = 1,
  kFileMissing,
  kMalformedLine,
  kOffsetMismatch,
  kUnknownLabel,
  kOverlap,
  kIllFormedSequence,
  kEmptyCorpus,
  kMalformedRow,
  kLabelVocabulary,
  kEmptyTrainingSet,
  kDivergenceDetected,
  kVersionMismatch,
  kCorruptFile,
  kLengthMismatch,
  kCrossDocumentAnnotation,
  kUnknownCategory,
  kOffsetOutOfRange,
  kIndexOutOfRange,
  kNumericalOverflow,
  kIo,
  kInternal,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace deid
