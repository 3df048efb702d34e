#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mvsel/dispatch.hpp"
#include "mvsel/ppm.hpp"
#include "mvsel/report.hpp"
#include "mvsel/scenario.hpp"

namespace mvsel {

// Perfect knowledge over the representative set ("ideal").
struct OracleSelector {};
// Always runs one version, e.g. the baseline-only binary.
struct FixedSelector {
  VersionId version = 0;
};
// Any callable, e.g. an in-memory model.
struct CustomSelector {
  std::string name;
  std::function<DispatchResult(std::span<const double>)> select;
};

using Selector = std::variant<OracleSelector, FixedSelector, DispatcherSpec, PpmModel, CustomSelector>;

struct SimulationRow {
  DatasetId dataset = 0;
  VersionId chosen = 0;
  VersionId ideal = 0;          // best of representative + baseline on this dataset
  double realized = 1.0;        // s(chosen, d)
  double ideal_speedup = 1.0;   // s(ideal, d)
  double oracle_speedup = 1.0;  // best over every version in the test matrix
  std::size_t comparisons = 0;
};

struct SimulationReport {
  std::string selector;
  std::vector<SimulationRow> rows;
  double geomean_realized = 1.0;
  double geomean_ideal = 1.0;   // G(S) on the test matrix
  double geomean_oracle = 1.0;  // G* on the test matrix
  double fraction_of_representative_oracle = 1.0;
  double fraction_of_full_oracle = 1.0;
  double mispick_rate = 0.0;
  double mean_comparisons = 0.0;
  std::size_t max_comparisons = 0;
  std::optional<CodeGrowth> code_growth;
  std::vector<DatasetId> train_overlap;  // test ids also present in training
};

struct SimulationOptions {
  std::vector<DatasetId> train_dataset_ids;          // for the overlap check
  std::optional<std::uint64_t> baseline_binary_size;  // enables code growth
};

// Runs the adaptive binary over every test dataset: pick a version with the
// selector, look up its realized speedup in the test matrix, aggregate.
SimulationReport simulate(const Scenario& test, const Selector& selector,
                          std::span<const VersionId> representative,
                          const SimulationOptions& options = {});

Report make_simulation_report(const SimulationReport& sim);

}  // namespace mvsel
