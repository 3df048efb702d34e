#include "mvsel/metrics.hpp"

#include <cmath>

namespace mvsel {

double error_rate(std::span<const VersionId> predicted, std::span<const VersionId> actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw Error(ErrorKind::kLengthMismatch, "error_rate needs equal, non-empty label lists");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != actual[i];
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

double rrse(std::span<const double> predicted, std::span<const double> actual, double train_mean) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw Error(ErrorKind::kLengthMismatch, "rrse needs equal, non-empty value lists");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    num += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
    den += (train_mean - actual[i]) * (train_mean - actual[i]);
  }
  if (!(den > 0.0)) {
    throw Error(ErrorKind::kDegenerateActuals, "all actual values equal the training mean");
  }
  return 100.0 * std::sqrt(num / den);
}

}  // namespace mvsel
