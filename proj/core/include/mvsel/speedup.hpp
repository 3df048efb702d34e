#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mvsel/scenario.hpp"

namespace mvsel {

// Speedup of every version over the baseline on every dataset:
// s(v,d) = t(baseline,d) / t(v,d), with ln s cached alongside.
// Rows are versions (sorted by id), columns are datasets (sorted by id).
class SpeedupMatrix {
 public:
  static SpeedupMatrix from_scenario(const Scenario& scenario);

  // Direct construction from speedup rows, used for hand-built fixtures.
  // rows[v][d] is s(version_ids[v], dataset_ids[d]); the baseline row must be
  // all ones.
  static SpeedupMatrix from_speedups(VersionId baseline, std::vector<VersionId> version_ids,
                                     std::vector<std::uint64_t> code_sizes,
                                     std::vector<DatasetId> dataset_ids,
                                     const std::vector<std::vector<double>>& rows);

  VersionId baseline_id() const { return version_ids_[baseline_index_]; }
  std::size_t baseline_index() const { return baseline_index_; }
  std::size_t num_versions() const { return version_ids_.size(); }
  std::size_t num_datasets() const { return dataset_ids_.size(); }

  std::span<const VersionId> version_ids() const { return version_ids_; }
  std::span<const DatasetId> dataset_ids() const { return dataset_ids_; }
  VersionId version_id(std::size_t index) const { return version_ids_[index]; }
  std::uint64_t code_size(std::size_t index) const { return code_sizes_[index]; }
  std::optional<std::size_t> version_index(VersionId id) const;

  double speedup(std::size_t version_index, std::size_t dataset_index) const {
    return entries_[version_index * dataset_ids_.size() + dataset_index];
  }
  double log_speedup(std::size_t version_index, std::size_t dataset_index) const {
    return log_entries_[version_index * dataset_ids_.size() + dataset_index];
  }
  std::span<const double> log_row(std::size_t version_index) const {
    return std::span<const double>(log_entries_).subspan(version_index * dataset_ids_.size(),
                                                          dataset_ids_.size());
  }

  // Indices of every non-baseline version, ascending by id.
  std::vector<std::size_t> candidate_indices() const;

 private:
  SpeedupMatrix() = default;
  void fill_logs();

  std::vector<VersionId> version_ids_;
  std::vector<std::uint64_t> code_sizes_;
  std::vector<DatasetId> dataset_ids_;
  std::size_t baseline_index_ = 0;
  std::vector<double> entries_;
  std::vector<double> log_entries_;
};

inline SpeedupMatrix speedups(const Scenario& scenario) {
  return SpeedupMatrix::from_scenario(scenario);
}

}  // namespace mvsel
