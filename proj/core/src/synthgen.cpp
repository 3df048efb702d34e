#include "mvsel/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "mvsel/rng.hpp"

namespace mvsel {
namespace {

constexpr std::uint64_t kStructureStream = 1;
constexpr std::uint64_t kDataStream = 2;

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw Error(ErrorKind::kInvalidConfig, std::string(name) + " range must satisfy lo <= hi");
  }
}

// Splits n into per-feature cell counts whose product is n, spreading prime
// factors so the grid is as square as possible.
std::vector<std::size_t> factorize_cells(std::size_t n, std::size_t arity) {
  std::vector<std::size_t> primes;
  for (std::size_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      primes.push_back(p);
      n /= p;
    }
  }
  if (n > 1) primes.push_back(n);
  std::vector<std::size_t> cells(arity, 1);
  std::sort(primes.rbegin(), primes.rend());
  for (const auto p : primes) {
    auto smallest = std::min_element(cells.begin(), cells.end());
    *smallest *= p;
  }
  return cells;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_versions < 2) throw Error(ErrorKind::kInvalidConfig, "n_versions must be at least 2");
  if (n_datasets < 1) throw Error(ErrorKind::kInvalidConfig, "n_datasets must be at least 1");
  if (feature_arity < 1) throw Error(ErrorKind::kInvalidConfig, "feature arity must be at least 1");
  if (regions() > n_versions - 1) {
    throw Error(ErrorKind::kInvalidConfig, "n_regions must not exceed n_versions - 1");
  }
  check_range(winner_speedup, "winner speedup");
  check_range(loser_speedup, "loser speedup");
  check_range(base_runtime, "base runtime");
  check_range(code_size, "code size");
  if (winner_speedup.lo <= 1.0) throw Error(ErrorKind::kInvalidConfig, "winner speedup lo must exceed 1");
  if (loser_speedup.lo <= 0.0) throw Error(ErrorKind::kInvalidConfig, "loser speedup lo must be positive");
  if (loser_speedup.hi >= winner_speedup.lo) {
    throw Error(ErrorKind::kInvalidConfig, "loser speedup hi must be below winner speedup lo");
  }
  if (base_runtime.lo <= 0.0) throw Error(ErrorKind::kInvalidConfig, "base runtime lo must be positive");
  if (code_size.lo < 1.0) throw Error(ErrorKind::kInvalidConfig, "code size lo must be at least 1");
  if (!std::isfinite(noise_sigma) || noise_sigma < 0.0) {
    throw Error(ErrorKind::kInvalidConfig, "noise sigma must be finite and non-negative");
  }
  if (feature_levels == 1) throw Error(ErrorKind::kInvalidConfig, "feature levels must be 0 or at least 2");
  for (const auto c : factorize_cells(regions(), feature_arity)) {
    if (feature_levels > 0 && c > feature_levels) {
      throw Error(ErrorKind::kInvalidConfig, "too few feature levels for the region grid");
    }
  }
}

std::size_t GroundTruth::region_of(std::span<const double> x) const {
  std::size_t region = 0;
  for (std::size_t f = 0; f < cuts.size(); ++f) {
    const auto cell = static_cast<std::size_t>(
        std::count_if(cuts[f].begin(), cuts[f].end(), [&](double c) { return x[f] > c; }));
    region = region * cells_per_feature[f] + cell;
  }
  return region;
}

std::pair<Scenario, GroundTruth> generate(const SynthConfig& config) {
  config.validate();
  Rng structure(derive_seed(config.structure_seed, kStructureStream));
  Rng data(derive_seed(config.seed, kDataStream));
  const auto nv = config.n_versions;
  const auto nd = config.n_datasets;
  const auto arity = config.feature_arity;
  const double step = config.feature_levels > 0 ? kFeatureBoxHigh / static_cast<double>(config.feature_levels) : 0.0;

  GroundTruth truth;
  truth.cells_per_feature = factorize_cells(config.regions(), arity);
  truth.cuts.resize(arity);
  for (std::size_t f = 0; f < arity; ++f) {
    const auto c = truth.cells_per_feature[f];
    const double width = kFeatureBoxHigh / static_cast<double>(c);
    for (std::size_t j = 1; j < c; ++j) {
      double cut = (static_cast<double>(j) + structure.uniform(-0.3, 0.3)) * width;
      if (step > 0.0) {
        const auto below = std::clamp(std::floor(cut / step), 0.0,
                                      static_cast<double>(config.feature_levels) - 2.0);
        cut = (below + 0.5) * step;
      }
      truth.cuts[f].push_back(cut);
    }
    std::sort(truth.cuts[f].begin(), truth.cuts[f].end());
  }

  std::vector<VersionId> candidates(nv - 1);
  std::iota(candidates.begin(), candidates.end(), VersionId{1});
  structure.shuffle(std::span<VersionId>(candidates));
  truth.region_winner.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(config.regions()));

  ScenarioTables tables;
  for (std::size_t v = 0; v < nv; ++v) {
    Version version;
    version.id = static_cast<VersionId>(v);
    version.name = v == 0 ? "baseline" : "v" + std::to_string(v);
    version.code_size = static_cast<std::uint64_t>(std::llround(structure.uniform(config.code_size.lo, config.code_size.hi)));
    version.is_baseline = v == 0;
    tables.versions.push_back(std::move(version));
  }

  truth.speedups.assign(nv, std::vector<double>(nd, 1.0));
  for (std::size_t d = 0; d < nd; ++d) {
    DatasetRecord record;
    record.id = config.first_dataset_id + static_cast<DatasetId>(d);
    record.features.resize(arity);
    for (auto& x : record.features) {
      if (step > 0.0) {
        x = static_cast<double>(data.below(config.feature_levels)) * step;
      } else {
        x = data.uniform(0.0, kFeatureBoxHigh);
      }
    }
    const auto region = truth.region_of(record.features);
    const auto winner = truth.region_winner[region];
    const double base = data.uniform(config.base_runtime.lo, config.base_runtime.hi);
    for (std::size_t v = 0; v < nv; ++v) {
      double s = 1.0;
      if (v != 0) {
        const auto& range = v == winner ? config.winner_speedup : config.loser_speedup;
        s = data.uniform(range.lo, range.hi);
      }
      truth.speedups[v][d] = s;
      const double jitter = std::exp(config.noise_sigma * data.normal());
      tables.runtimes.push_back({record.id, static_cast<VersionId>(v), base / s * jitter});
    }
    truth.dataset_ids.push_back(record.id);
    truth.dataset_region.push_back(region);
    tables.datasets.push_back(std::move(record));
  }
  return {Scenario::from_tables(std::move(tables)), std::move(truth)};
}

void write_ground_truth_csv(std::ostream& out, const GroundTruth& truth) {
  out << "dataset_id,true_best_version_id\n";
  for (std::size_t d = 0; d < truth.dataset_ids.size(); ++d) {
    out << truth.dataset_ids[d] << ',' << truth.winner_of(d) << '\n';
  }
}

void write_synthetic_dir(const Scenario& scenario, const GroundTruth& truth,
                         const std::filesystem::path& dir) {
  write_scenario_dir(scenario, dir);
  std::ofstream out(dir / "ground_truth.csv", std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + (dir / "ground_truth.csv").string());
  write_ground_truth_csv(out, truth);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + (dir / "ground_truth.csv").string());
}

}  // namespace mvsel
