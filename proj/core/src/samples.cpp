#include "mvsel/samples.hpp"

namespace mvsel {

VersionId best_kept_version(const SpeedupMatrix& m, std::span<const VersionId> members,
                            std::size_t d) {
  std::size_t best = m.baseline_index();
  for (const auto id : members) {
    const auto v = m.version_index(id);
    if (!v) throw Error(ErrorKind::kUnknownVersion, "version " + std::to_string(id));
    const double s = m.speedup(*v, d);
    const double b = m.speedup(best, d);
    if (s > b || (s == b && (m.code_size(*v) < m.code_size(best) ||
                             (m.code_size(*v) == m.code_size(best) && id < m.version_id(best))))) {
      best = *v;
    }
  }
  return m.version_id(best);
}

std::vector<LabeledSample> make_dc_labels(const SpeedupMatrix& m,
                                          std::span<const std::vector<double>> features,
                                          std::span<const VersionId> representative) {
  if (features.size() != m.num_datasets()) {
    throw Error(ErrorKind::kLengthMismatch, "one feature row per dataset is required");
  }
  std::vector<LabeledSample> out;
  out.reserve(m.num_datasets());
  for (std::size_t d = 0; d < m.num_datasets(); ++d) {
    out.push_back({features[d], best_kept_version(m, representative, d)});
  }
  return out;
}

std::vector<RegressionSample> make_regression_samples(const SpeedupMatrix& m,
                                                      std::span<const std::vector<double>> features,
                                                      VersionId version) {
  if (features.size() != m.num_datasets()) {
    throw Error(ErrorKind::kLengthMismatch, "one feature row per dataset is required");
  }
  const auto v = m.version_index(version);
  if (!v) throw Error(ErrorKind::kUnknownVersion, "version " + std::to_string(version));
  std::vector<RegressionSample> out;
  out.reserve(m.num_datasets());
  for (std::size_t d = 0; d < m.num_datasets(); ++d) {
    out.push_back({features[d], m.log_speedup(*v, d)});
  }
  return out;
}

}  // namespace mvsel
