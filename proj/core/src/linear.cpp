#include "mvsel/linear.hpp"

#include <Eigen/Dense>

namespace mvsel {

LinearModel train_linear_regression(std::span<const RegressionSample> samples) {
  if (samples.empty()) throw Error(ErrorKind::kNoTrainingData, "linear regression needs >= 1 sample");
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto k = static_cast<Eigen::Index>(samples.front().features.size());
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(s.features.size()) != k) {
      throw Error(ErrorKind::kFeatureArity, "samples have mixed feature arity");
    }
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = s.features[static_cast<std::size_t>(j)];
    y(i) = s.target;
  }

  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  LinearModel model;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  if (k > 0) {
    Eigen::MatrixXd gram = xc.transpose() * xc;
    const Eigen::VectorXd rhs = xc.transpose() * yc;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
      gram.diagonal().array() += kRidgeJitter;
      llt.compute(gram);
      model.jittered = true;
    }
    beta = llt.solve(rhs);
  }
  model.coefficients.assign(beta.data(), beta.data() + beta.size());
  model.intercept = y_mean - x_mean.dot(beta);
  return model;
}

double predict_linear(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.coefficients.size()) {
    throw Error(ErrorKind::kFeatureArity, "expected " + std::to_string(model.coefficients.size()) +
                                              " features, got " + std::to_string(x.size()));
  }
  double y = model.intercept;
  for (std::size_t i = 0; i < x.size(); ++i) y += model.coefficients[i] * x[i];
  return y;
}

}  // namespace mvsel
