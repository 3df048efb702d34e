#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvsel/error.hpp"

namespace mvsel {

using VersionId = std::uint32_t;
using DatasetId = std::uint32_t;

// One optimized variant of the hot function.
struct Version {
  VersionId id = 0;
  std::string name;
  std::uint64_t code_size = 0;  // bytes
  bool is_baseline = false;
};

struct DatasetRecord {
  DatasetId id = 0;
  std::vector<double> features;
};

struct RuntimeCell {
  DatasetId dataset = 0;
  VersionId version = 0;
  double seconds = 0.0;
};

// Unvalidated scenario content, as read from the three CSV tables.
struct ScenarioTables {
  std::vector<Version> versions;
  std::vector<DatasetRecord> datasets;
  std::vector<RuntimeCell> runtimes;
};

enum class TableName { kVersions = 0, kDatasets = 1, kRuntimes = 2, kScenario = 3 };

struct Violation {
  TableName table = TableName::kScenario;
  ErrorKind kind = ErrorKind::kInvalidScenario;
  // Row key inside the table: version id, dataset id, or (dataset, version)
  // for runtime cells. Table-wide violations carry no key.
  std::optional<std::uint64_t> id;
  std::optional<std::uint64_t> secondary_id;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

// Every invariant violation in `tables`, ordered by table, then key. An empty
// report means Scenario::from_tables will succeed.
ValidationReport validate_scenario(const ScenarioTables& tables);

std::string describe(const Violation& violation);

// Validated, immutable scenario. Versions and datasets are held sorted by id;
// runtimes are dense, indexed [dataset_index][version_index].
class Scenario {
 public:
  // Throws Error with the kind of the first violation found.
  static Scenario from_tables(ScenarioTables tables);

  std::span<const Version> versions() const { return versions_; }
  std::span<const DatasetRecord> datasets() const { return datasets_; }
  std::size_t num_versions() const { return versions_.size(); }
  std::size_t num_datasets() const { return datasets_.size(); }
  std::size_t feature_arity() const { return arity_; }
  std::size_t baseline_index() const { return baseline_index_; }
  const Version& baseline() const { return versions_[baseline_index_]; }

  double runtime(std::size_t dataset_index, std::size_t version_index) const {
    return runtimes_[dataset_index * versions_.size() + version_index];
  }

  std::optional<std::size_t> version_index(VersionId id) const;
  std::optional<std::size_t> dataset_index(DatasetId id) const;

  // Feature vectors in dataset order.
  std::vector<std::vector<double>> feature_rows() const;

  ScenarioTables to_tables() const;

 private:
  Scenario() = default;

  std::vector<Version> versions_;
  std::vector<DatasetRecord> datasets_;
  std::vector<double> runtimes_;
  std::size_t arity_ = 0;
  std::size_t baseline_index_ = 0;
  std::unordered_map<VersionId, std::size_t> version_lookup_;
  std::unordered_map<DatasetId, std::size_t> dataset_lookup_;
};

// CSV ingestion. Table formats:
//   versions.csv  id,name,code_size,is_baseline
//   datasets.csv  id,f0,f1,...,f{k-1}
//   runtimes.csv  dataset_id,version_id,runtime_seconds
ScenarioTables read_scenario_tables(std::istream& versions, std::istream& datasets,
                                    std::istream& runtimes);
Scenario load_scenario(std::istream& versions, std::istream& datasets, std::istream& runtimes);

// Loads versions.csv, datasets.csv and runtimes.csv from a directory.
Scenario load_scenario_dir(const std::filesystem::path& dir);

void write_versions_csv(std::ostream& out, std::span<const Version> versions);
void write_datasets_csv(std::ostream& out, std::span<const DatasetRecord> datasets,
                        std::size_t arity);
void write_runtimes_csv(std::ostream& out, const Scenario& scenario);
void write_scenario_dir(const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace mvsel
