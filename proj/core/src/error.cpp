#include "mvsel/error.hpp"

namespace mvsel {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kIncompleteMatrix: return "incomplete matrix";
    case ErrorKind::kDuplicateId: return "duplicate id";
    case ErrorKind::kNonPositiveMeasurement: return "non-positive measurement";
    case ErrorKind::kBaselineCount: return "baseline count";
    case ErrorKind::kInvalidScenario: return "invalid scenario";
    case ErrorKind::kUnknownVersion: return "unknown version";
    case ErrorKind::kUnknownDataset: return "unknown dataset";
    case ErrorKind::kNoCandidates: return "no candidates";
    case ErrorKind::kInstanceTooLarge: return "instance too large for oracle";
    case ErrorKind::kInvalidConfig: return "invalid config";
    case ErrorKind::kNoTrainingData: return "no training data";
    case ErrorKind::kFeatureArity: return "feature arity";
    case ErrorKind::kLengthMismatch: return "length mismatch";
    case ErrorKind::kDegenerateActuals: return "degenerate actuals";
    case ErrorKind::kModelIncomplete: return "model incomplete";
    case ErrorKind::kInvalidDispatcher: return "invalid dispatcher";
    case ErrorKind::kTemplate: return "template missing placeholder";
    case ErrorKind::kIo: return "io error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      detail_(detail) {}

}  // namespace mvsel
