#pragma once

#include <map>
#include <span>
#include <variant>
#include <vector>

#include "mvsel/linear.hpp"
#include "mvsel/tree.hpp"

namespace mvsel {

using Regressor = std::variant<TreeModel, LinearModel>;

double predict_regressor(const Regressor& model, std::span<const double> x);

// Performance prediction model: one regressor per kept version predicting
// ln speedup over the baseline. The baseline itself is the constant 0.
struct PpmModel {
  VersionId baseline = 0;
  std::vector<VersionId> representative;
  std::map<VersionId, std::uint64_t> code_sizes;  // representative + baseline
  std::map<VersionId, Regressor> models;
};

enum class RegressorKind { kRegressionTree, kLinear };

PpmModel train_ppm(const SpeedupMatrix& matrix, std::span<const std::vector<double>> features,
                   std::span<const VersionId> representative, RegressorKind kind,
                   const TreeConfig& tree_config = TreeConfig::regression_defaults());

struct PpmChoice {
  VersionId version = 0;
  double predicted = 0.0;  // winning predicted ln speedup
};

// Argmax of predicted ln speedup over representative + baseline; ties go to
// the smaller code size, then the smaller id. Throws kModelIncomplete when a
// representative version has no regressor.
PpmChoice ppm_select(const PpmModel& model, std::span<const double> x);

}  // namespace mvsel
