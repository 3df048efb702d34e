#include "mvsel/speedup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mvsel {

SpeedupMatrix SpeedupMatrix::from_scenario(const Scenario& scenario) {
  SpeedupMatrix m;
  const auto nv = scenario.num_versions();
  const auto nd = scenario.num_datasets();
  for (const auto& v : scenario.versions()) {
    m.version_ids_.push_back(v.id);
    m.code_sizes_.push_back(v.code_size);
  }
  for (const auto& d : scenario.datasets()) m.dataset_ids_.push_back(d.id);
  m.baseline_index_ = scenario.baseline_index();
  m.entries_.resize(nv * nd);
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t d = 0; d < nd; ++d) {
      m.entries_[v * nd + d] = v == m.baseline_index_
                                   ? 1.0
                                   : scenario.runtime(d, m.baseline_index_) / scenario.runtime(d, v);
    }
  }
  m.fill_logs();
  return m;
}

SpeedupMatrix SpeedupMatrix::from_speedups(VersionId baseline, std::vector<VersionId> version_ids,
                                           std::vector<std::uint64_t> code_sizes,
                                           std::vector<DatasetId> dataset_ids,
                                           const std::vector<std::vector<double>>& rows) {
  const auto nv = version_ids.size();
  const auto nd = dataset_ids.size();
  if (code_sizes.size() != nv || rows.size() != nv) {
    throw Error(ErrorKind::kLengthMismatch, "speedup rows, code sizes and version ids differ in length");
  }
  std::vector<std::size_t> order(nv);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return version_ids[a] < version_ids[b]; });
  std::vector<std::size_t> dorder(nd);
  std::iota(dorder.begin(), dorder.end(), 0);
  std::sort(dorder.begin(), dorder.end(),
            [&](std::size_t a, std::size_t b) { return dataset_ids[a] < dataset_ids[b]; });

  SpeedupMatrix m;
  bool found = false;
  for (std::size_t i = 0; i < nv; ++i) {
    const auto src = order[i];
    if (i > 0 && version_ids[src] == m.version_ids_.back()) {
      throw Error(ErrorKind::kDuplicateId, "version id " + std::to_string(version_ids[src]));
    }
    m.version_ids_.push_back(version_ids[src]);
    m.code_sizes_.push_back(code_sizes[src]);
    if (version_ids[src] == baseline) {
      m.baseline_index_ = i;
      found = true;
    }
  }
  if (!found) throw Error(ErrorKind::kBaselineCount, "baseline id not among version ids");
  for (std::size_t j = 0; j < nd; ++j) {
    if (j > 0 && dataset_ids[dorder[j]] == m.dataset_ids_.back()) {
      throw Error(ErrorKind::kDuplicateId, "dataset id " + std::to_string(dataset_ids[dorder[j]]));
    }
    m.dataset_ids_.push_back(dataset_ids[dorder[j]]);
  }
  m.entries_.resize(nv * nd);
  for (std::size_t i = 0; i < nv; ++i) {
    const auto& row = rows[order[i]];
    if (row.size() != nd) {
      throw Error(ErrorKind::kLengthMismatch, "speedup row for version " +
                                                  std::to_string(m.version_ids_[i]) +
                                                  " has wrong length");
    }
    for (std::size_t j = 0; j < nd; ++j) {
      const double s = row[dorder[j]];
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw Error(ErrorKind::kNonPositiveMeasurement, "speedup must be positive and finite");
      }
      if (i == m.baseline_index_ && s != 1.0) {
        throw Error(ErrorKind::kInvalidScenario, "baseline speedups must all be 1");
      }
      m.entries_[i * nd + j] = s;
    }
  }
  m.fill_logs();
  return m;
}

void SpeedupMatrix::fill_logs() {
  log_entries_.resize(entries_.size());
  std::transform(entries_.begin(), entries_.end(), log_entries_.begin(),
                 [](double s) { return std::log(s); });
}

std::optional<std::size_t> SpeedupMatrix::version_index(VersionId id) const {
  const auto it = std::lower_bound(version_ids_.begin(), version_ids_.end(), id);
  if (it == version_ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - version_ids_.begin());
}

std::vector<std::size_t> SpeedupMatrix::candidate_indices() const {
  std::vector<std::size_t> out;
  out.reserve(version_ids_.size());
  for (std::size_t i = 0; i < version_ids_.size(); ++i) {
    if (i != baseline_index_) out.push_back(i);
  }
  return out;
}

}  // namespace mvsel
