#include "mvsel/ppm.hpp"

namespace mvsel {

double predict_regressor(const Regressor& model, std::span<const double> x) {
  if (const auto* tree = std::get_if<TreeModel>(&model)) return predict_tree(*tree, x).value;
  return predict_linear(std::get<LinearModel>(model), x);
}

PpmModel train_ppm(const SpeedupMatrix& matrix, std::span<const std::vector<double>> features,
                   std::span<const VersionId> representative, RegressorKind kind,
                   const TreeConfig& tree_config) {
  PpmModel model;
  model.baseline = matrix.baseline_id();
  model.representative.assign(representative.begin(), representative.end());
  model.code_sizes[model.baseline] = matrix.code_size(matrix.baseline_index());
  for (const auto id : representative) {
    const auto v = matrix.version_index(id);
    if (!v) throw Error(ErrorKind::kUnknownVersion, "version " + std::to_string(id));
    model.code_sizes[id] = matrix.code_size(*v);
    const auto samples = make_regression_samples(matrix, features, id);
    if (kind == RegressorKind::kRegressionTree) {
      model.models.emplace(id, train_regression_tree(samples, tree_config));
    } else {
      model.models.emplace(id, train_linear_regression(samples));
    }
  }
  return model;
}

PpmChoice ppm_select(const PpmModel& model, std::span<const double> x) {
  PpmChoice best{model.baseline, 0.0};
  auto size_of = [&](VersionId id) {
    const auto it = model.code_sizes.find(id);
    if (it == model.code_sizes.end()) {
      throw Error(ErrorKind::kModelIncomplete, "no code size for version " + std::to_string(id));
    }
    return it->second;
  };
  for (const auto id : model.representative) {
    const auto it = model.models.find(id);
    if (it == model.models.end()) {
      throw Error(ErrorKind::kModelIncomplete, "no regressor for version " + std::to_string(id));
    }
    const double p = predict_regressor(it->second, x);
    const bool wins = p > best.predicted ||
                      (p == best.predicted &&
                       (size_of(id) < size_of(best.version) ||
                        (size_of(id) == size_of(best.version) && id < best.version)));
    if (wins) best = {id, p};
  }
  return best;
}

}  // namespace mvsel
