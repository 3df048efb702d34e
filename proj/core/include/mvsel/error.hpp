#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvsel {

enum class ErrorKind {
  kParse,
  kIncompleteMatrix,
  kDuplicateId,
  kNonPositiveMeasurement,
  kBaselineCount,
  kInvalidScenario,
  kUnknownVersion,
  kUnknownDataset,
  kNoCandidates,
  kInstanceTooLarge,
  kInvalidConfig,
  kNoTrainingData,
  kFeatureArity,
  kLengthMismatch,
  kDegenerateActuals,
  kModelIncomplete,
  kInvalidDispatcher,
  kTemplate,
  kIo,
};

// Short stable tag for an error kind, e.g. "incomplete matrix".
std::string_view to_string(ErrorKind kind);

// All library failures are reported through this exception. what() reads
// "<tag>: <detail>" so callers can match on the tag prefix.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace mvsel
