#pragma once

#include <span>
#include <vector>

#include "mvsel/samples.hpp"

namespace mvsel {

struct LinearModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  bool jittered = false;  // true when the ridge fallback was needed
};

inline constexpr double kRidgeJitter = 1e-8;

// Least squares with intercept via the normal equations. Features are centred
// first; if the centred Gram matrix is singular or badly conditioned,
// kRidgeJitter is added to its diagonal.
LinearModel train_linear_regression(std::span<const RegressionSample> samples);

double predict_linear(const LinearModel& model, std::span<const double> x);

}  // namespace mvsel
