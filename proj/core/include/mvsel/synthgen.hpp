#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "mvsel/scenario.hpp"

namespace mvsel {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Features are drawn uniformly from the box [0, kFeatureBoxHigh)^arity. With
// feature_levels > 0 each feature is instead uniform over the lattice
// {0, step, ..., (levels - 1) * step}, step = kFeatureBoxHigh / levels, and
// region cuts sit halfway between lattice points.
inline constexpr double kFeatureBoxHigh = 1000.0;

struct SynthConfig {
  std::size_t n_versions = 4;  // including the baseline (id 0)
  std::size_t n_datasets = 100;
  std::size_t feature_arity = 2;
  std::size_t n_regions = 0;  // 0 selects n_versions - 1
  Range winner_speedup{1.2, 2.0};
  Range loser_speedup{0.7, 1.1};
  double noise_sigma = 0.0;
  Range base_runtime{0.5, 2.0};
  Range code_size{1000.0, 5000.0};
  std::size_t feature_levels = 0;
  std::uint64_t seed = 0;
  // Drives cuts, winners and code sizes. Reusing it with a fresh `seed`
  // yields a held-out scenario over the same regions.
  std::uint64_t structure_seed = 0;
  DatasetId first_dataset_id = 0;

  std::size_t regions() const { return n_regions == 0 ? n_versions - 1 : n_regions; }
  void validate() const;  // throws kInvalidConfig
};

struct GroundTruth {
  std::vector<std::vector<double>> cuts;  // per feature, sorted
  std::vector<std::size_t> cells_per_feature;
  std::vector<VersionId> region_winner;   // indexed by region
  std::vector<DatasetId> dataset_ids;
  std::vector<std::size_t> dataset_region;
  std::vector<std::vector<double>> speedups;  // [version id][dataset index], noiseless

  std::size_t region_of(std::span<const double> x) const;
  VersionId winner_of(std::size_t dataset_index) const {
    return region_winner[dataset_region[dataset_index]];
  }
};

std::pair<Scenario, GroundTruth> generate(const SynthConfig& config);

// ground_truth.csv: dataset_id,true_best_version_id
void write_ground_truth_csv(std::ostream& out, const GroundTruth& truth);
// Writes versions.csv, datasets.csv, runtimes.csv and ground_truth.csv.
void write_synthetic_dir(const Scenario& scenario, const GroundTruth& truth,
                         const std::filesystem::path& dir);

}  // namespace mvsel
