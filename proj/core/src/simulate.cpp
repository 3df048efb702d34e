#include "mvsel/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mvsel/samples.hpp"
#include "mvsel/speedup.hpp"

namespace mvsel {
namespace {

std::string selector_name(const Selector& s) {
  switch (s.index()) {
    case 0: return "oracle";
    case 1: return "fixed";
    case 2: return "dispatcher";
    case 3: return "ppm";
    default: return std::get<CustomSelector>(s).name;
  }
}

}  // namespace

SimulationReport simulate(const Scenario& test, const Selector& selector,
                          std::span<const VersionId> representative,
                          const SimulationOptions& options) {
  const auto matrix = SpeedupMatrix::from_scenario(test);
  for (const auto id : representative) {
    if (!matrix.version_index(id)) {
      throw Error(ErrorKind::kUnknownVersion,
                  "representative version " + std::to_string(id) + " absent from test matrix");
    }
    if (id == matrix.baseline_id()) {
      throw Error(ErrorKind::kUnknownVersion, "the baseline cannot be a representative");
    }
  }
  std::vector<VersionId> allowed(representative.begin(), representative.end());
  allowed.push_back(matrix.baseline_id());

  if (const auto* spec = std::get_if<DispatcherSpec>(&selector)) {
    validate_dispatcher(*spec);
    check_leaf_versions(*spec, allowed);
  }

  SimulationReport sim;
  sim.selector = selector_name(selector);
  const auto nd = matrix.num_datasets();
  const auto candidates = matrix.candidate_indices();
  double log_realized = 0.0;
  double log_ideal = 0.0;
  double log_oracle = 0.0;
  std::size_t mispicks = 0;
  std::size_t total_comparisons = 0;

  for (std::size_t d = 0; d < nd; ++d) {
    const auto& features = test.datasets()[d].features;
    SimulationRow row;
    row.dataset = matrix.dataset_ids()[d];
    row.ideal = best_kept_version(matrix, representative, d);

    DispatchResult pick;
    if (std::holds_alternative<OracleSelector>(selector)) {
      pick.version = row.ideal;
    } else if (const auto* fixed = std::get_if<FixedSelector>(&selector)) {
      pick.version = fixed->version;
    } else if (const auto* spec = std::get_if<DispatcherSpec>(&selector)) {
      pick = eval_dispatcher(*spec, features);
    } else if (const auto* ppm = std::get_if<PpmModel>(&selector)) {
      pick.version = ppm_select(*ppm, features).version;
      // Scoring one regressor per kept version is the PPM selection cost.
      pick.comparisons = ppm->representative.size();
    } else {
      pick = std::get<CustomSelector>(selector).select(features);
    }
    if (std::find(allowed.begin(), allowed.end(), pick.version) == allowed.end()) {
      throw Error(ErrorKind::kUnknownVersion,
                  "selector chose version " + std::to_string(pick.version) +
                      " outside the representative set");
    }
    row.chosen = pick.version;
    row.comparisons = pick.comparisons;
    const auto chosen_index = *matrix.version_index(row.chosen);
    const auto ideal_index = *matrix.version_index(row.ideal);
    row.realized = matrix.speedup(chosen_index, d);
    row.ideal_speedup = matrix.speedup(ideal_index, d);
    row.oracle_speedup = 1.0;
    for (const auto v : candidates) row.oracle_speedup = std::max(row.oracle_speedup, matrix.speedup(v, d));

    log_realized += matrix.log_speedup(chosen_index, d);
    log_ideal += matrix.log_speedup(ideal_index, d);
    log_oracle += std::log(row.oracle_speedup);
    mispicks += row.chosen != row.ideal;
    total_comparisons += row.comparisons;
    sim.max_comparisons = std::max(sim.max_comparisons, row.comparisons);
    sim.rows.push_back(row);
  }

  const double n = static_cast<double>(nd);
  sim.geomean_realized = std::exp(log_realized / n);
  sim.geomean_ideal = std::exp(log_ideal / n);
  sim.geomean_oracle = std::exp(log_oracle / n);
  sim.fraction_of_representative_oracle = sim.geomean_realized / sim.geomean_ideal;
  sim.fraction_of_full_oracle = sim.geomean_realized / sim.geomean_oracle;
  sim.mispick_rate = static_cast<double>(mispicks) / n;
  sim.mean_comparisons = static_cast<double>(total_comparisons) / n;

  if (!options.train_dataset_ids.empty()) {
    auto train = options.train_dataset_ids;
    std::sort(train.begin(), train.end());
    for (const auto id : matrix.dataset_ids()) {
      if (std::binary_search(train.begin(), train.end(), id)) sim.train_overlap.push_back(id);
    }
  }

  if (options.baseline_binary_size) {
    std::map<VersionId, std::uint64_t> sizes;
    for (const auto& v : test.versions()) sizes[v.id] = v.code_size;
    if (const auto* spec = std::get_if<DispatcherSpec>(&selector)) {
      sim.code_growth = code_growth(representative, sizes, *options.baseline_binary_size, *spec);
    } else {
      CodeGrowth g;
      double total = 0.0;
      for (const auto id : representative) total += static_cast<double>(sizes.at(id));
      if (*options.baseline_binary_size == 0) throw Error(ErrorKind::kInvalidConfig, "zero baseline size");
      g.multiversioning_growth = total / static_cast<double>(*options.baseline_binary_size);
      sim.code_growth = g;
    }
  }
  return sim;
}

Report make_simulation_report(const SimulationReport& sim) {
  Report report("simulation");
  auto& summary = report.keyvalues("summary");
  Report::put(summary, "selector", sim.selector);
  Report::put(summary, "datasets", static_cast<std::int64_t>(sim.rows.size()));
  Report::put(summary, "geomean_realized", sim.geomean_realized);
  Report::put(summary, "geomean_ideal", sim.geomean_ideal);
  Report::put(summary, "geomean_full_oracle", sim.geomean_oracle);
  Report::put(summary, "fraction_of_representative_oracle", sim.fraction_of_representative_oracle);
  Report::put(summary, "fraction_of_full_oracle", sim.fraction_of_full_oracle);
  Report::put(summary, "mispick_rate", sim.mispick_rate);
  Report::put(summary, "mean_comparisons", sim.mean_comparisons);
  Report::put(summary, "max_comparisons", static_cast<std::int64_t>(sim.max_comparisons));
  if (sim.code_growth) {
    Report::put(summary, "selector_growth", sim.code_growth->selector_growth);
    Report::put(summary, "multiversioning_growth", sim.code_growth->multiversioning_growth);
  }
  std::vector<std::int64_t> overlap(sim.train_overlap.begin(), sim.train_overlap.end());
  Report::put(summary, "train_test_overlap", static_cast<std::int64_t>(overlap.size()));
  if (!overlap.empty()) {
    Report::put(summary, "warning",
                std::string("test datasets overlap the training datasets; results are not held out"));
    Report::put(summary, "overlap_ids", overlap);
  }

  auto& rows = report.table("datasets", {"dataset_id", "chosen", "ideal", "realized_speedup",
                                         "ideal_speedup", "oracle_speedup", "comparisons"});
  for (const auto& r : sim.rows) {
    rows.rows.push_back({static_cast<std::int64_t>(r.dataset), static_cast<std::int64_t>(r.chosen),
                         static_cast<std::int64_t>(r.ideal), r.realized, r.ideal_speedup,
                         r.oracle_speedup, static_cast<std::int64_t>(r.comparisons)});
  }
  return report;
}

}  // namespace mvsel
