#pragma once

#include <span>
#include <vector>

#include "mvsel/speedup.hpp"

namespace mvsel {

// Direct-classification training pair: dataset features -> best kept version.
struct LabeledSample {
  std::vector<double> features;
  VersionId label = 0;
};

// Performance-prediction training pair for one fixed version: ln s(v,d).
struct RegressionSample {
  std::vector<double> features;
  double target = 0.0;
};

// Best version for dataset `dataset_index` among `members` plus the baseline.
// Exact speedup ties go to the smaller code size, then the smaller id.
VersionId best_kept_version(const SpeedupMatrix& matrix, std::span<const VersionId> members,
                            std::size_t dataset_index);

// One sample per dataset; `features` is indexed like the matrix's datasets.
std::vector<LabeledSample> make_dc_labels(const SpeedupMatrix& matrix,
                                          std::span<const std::vector<double>> features,
                                          std::span<const VersionId> representative);

std::vector<RegressionSample> make_regression_samples(
    const SpeedupMatrix& matrix, std::span<const std::vector<double>> features, VersionId version);

}  // namespace mvsel
