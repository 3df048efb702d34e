#include "mvsel/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "mvsel/csv.hpp"

namespace mvsel {
namespace {

std::string cell_name(DatasetId d, VersionId v) {
  return "(d" + std::to_string(d) + ", v" + std::to_string(v) + ")";
}

Violation make(TableName table, ErrorKind kind, std::optional<std::uint64_t> id,
               std::optional<std::uint64_t> secondary, std::string message) {
  return Violation{table, kind, id, secondary, std::move(message)};
}

void check_header(const CsvTable& table, const std::vector<std::string>& expected) {
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw Error(ErrorKind::kParse, table.source + ":1: header must be '" + want + "'");
  }
}

}  // namespace

std::string describe(const Violation& v) {
  return std::string(to_string(v.kind)) + ": " + v.message;
}

ValidationReport validate_scenario(const ScenarioTables& tables) {
  ValidationReport report;

  // versions
  std::map<VersionId, int> version_count;
  std::size_t baselines = 0;
  for (const auto& v : tables.versions) {
    if (++version_count[v.id] == 2) {
      report.push_back(make(TableName::kVersions, ErrorKind::kDuplicateId, v.id, std::nullopt,
                            "version id " + std::to_string(v.id) + " appears more than once"));
    }
    if (v.code_size < 1) {
      report.push_back(make(TableName::kVersions, ErrorKind::kNonPositiveMeasurement, v.id,
                            std::nullopt,
                            "version " + std::to_string(v.id) + " has code_size 0"));
    }
    if (v.is_baseline) ++baselines;
  }
  if (baselines != 1) {
    report.push_back(make(TableName::kVersions, ErrorKind::kBaselineCount, std::nullopt,
                          std::nullopt,
                          "expected exactly one baseline version, found " +
                              std::to_string(baselines)));
  }

  // datasets
  std::map<DatasetId, int> dataset_count;
  const std::size_t arity = tables.datasets.empty() ? 0 : tables.datasets.front().features.size();
  if (!tables.datasets.empty() && arity == 0) {
    report.push_back(make(TableName::kDatasets, ErrorKind::kFeatureArity, std::nullopt,
                          std::nullopt, "datasets must carry at least one feature"));
  }
  for (const auto& d : tables.datasets) {
    if (++dataset_count[d.id] == 2) {
      report.push_back(make(TableName::kDatasets, ErrorKind::kDuplicateId, d.id, std::nullopt,
                            "dataset id " + std::to_string(d.id) + " appears more than once"));
    }
    if (d.features.size() != arity) {
      report.push_back(make(TableName::kDatasets, ErrorKind::kFeatureArity, d.id, std::nullopt,
                            "dataset " + std::to_string(d.id) + " has " +
                                std::to_string(d.features.size()) + " features, expected " +
                                std::to_string(arity)));
    }
    for (std::size_t i = 0; i < d.features.size(); ++i) {
      if (!std::isfinite(d.features[i])) {
        report.push_back(make(TableName::kDatasets, ErrorKind::kInvalidScenario, d.id, i,
                              "dataset " + std::to_string(d.id) + " feature " +
                                  std::to_string(i) + " is not finite"));
      }
    }
  }

  // runtimes
  std::map<std::pair<DatasetId, VersionId>, int> cell_count;
  for (const auto& c : tables.runtimes) {
    const auto name = cell_name(c.dataset, c.version);
    if (!dataset_count.contains(c.dataset)) {
      report.push_back(make(TableName::kRuntimes, ErrorKind::kUnknownDataset, c.dataset,
                            c.version, "runtime cell " + name + " names an unknown dataset"));
    }
    if (!version_count.contains(c.version)) {
      report.push_back(make(TableName::kRuntimes, ErrorKind::kUnknownVersion, c.dataset,
                            c.version, "runtime cell " + name + " names an unknown version"));
    }
    if (++cell_count[{c.dataset, c.version}] == 2) {
      report.push_back(make(TableName::kRuntimes, ErrorKind::kDuplicateId, c.dataset, c.version,
                            "runtime cell " + name + " appears more than once"));
    }
    if (!(c.seconds > 0.0) || !std::isfinite(c.seconds)) {
      report.push_back(make(TableName::kRuntimes, ErrorKind::kNonPositiveMeasurement, c.dataset,
                            c.version,
                            "runtime cell " + name + " is " + format_real(c.seconds) +
                                " seconds"));
    }
  }
  for (const auto& [d, dn] : dataset_count) {
    for (const auto& [v, vn] : version_count) {
      if (!cell_count.contains({d, v})) {
        report.push_back(make(TableName::kRuntimes, ErrorKind::kIncompleteMatrix, d, v,
                              "missing runtime for " + cell_name(d, v)));
      }
    }
  }

  if (version_count.size() < 2) {
    report.push_back(make(TableName::kScenario, ErrorKind::kInvalidScenario, std::nullopt,
                          std::nullopt, "need at least 2 versions (baseline + 1 candidate)"));
  }
  if (dataset_count.empty()) {
    report.push_back(make(TableName::kScenario, ErrorKind::kInvalidScenario, std::nullopt,
                          std::nullopt, "need at least 1 dataset"));
  }

  // Table-wide entries sort ahead of keyed ones within the same table.
  std::stable_sort(report.begin(), report.end(), [](const Violation& a, const Violation& b) {
    auto key = [](const Violation& v) {
      return std::make_tuple(static_cast<int>(v.table), v.id.has_value(), v.id.value_or(0),
                             v.secondary_id.value_or(0));
    };
    return key(a) < key(b);
  });
  return report;
}

Scenario Scenario::from_tables(ScenarioTables tables) {
  const auto report = validate_scenario(tables);
  if (!report.empty()) {
    throw Error(report.front().kind, report.front().message);
  }

  Scenario s;
  s.versions_ = std::move(tables.versions);
  s.datasets_ = std::move(tables.datasets);
  std::sort(s.versions_.begin(), s.versions_.end(),
            [](const Version& a, const Version& b) { return a.id < b.id; });
  std::sort(s.datasets_.begin(), s.datasets_.end(),
            [](const DatasetRecord& a, const DatasetRecord& b) { return a.id < b.id; });
  s.arity_ = s.datasets_.front().features.size();
  for (std::size_t i = 0; i < s.versions_.size(); ++i) {
    s.version_lookup_.emplace(s.versions_[i].id, i);
    if (s.versions_[i].is_baseline) s.baseline_index_ = i;
  }
  for (std::size_t i = 0; i < s.datasets_.size(); ++i) {
    s.dataset_lookup_.emplace(s.datasets_[i].id, i);
  }
  s.runtimes_.assign(s.versions_.size() * s.datasets_.size(), 0.0);
  for (const auto& c : tables.runtimes) {
    s.runtimes_[s.dataset_lookup_.at(c.dataset) * s.versions_.size() +
                s.version_lookup_.at(c.version)] = c.seconds;
  }
  return s;
}

std::optional<std::size_t> Scenario::version_index(VersionId id) const {
  const auto it = version_lookup_.find(id);
  if (it == version_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Scenario::dataset_index(DatasetId id) const {
  const auto it = dataset_lookup_.find(id);
  if (it == dataset_lookup_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<double>> Scenario::feature_rows() const {
  std::vector<std::vector<double>> rows;
  rows.reserve(datasets_.size());
  for (const auto& d : datasets_) rows.push_back(d.features);
  return rows;
}

ScenarioTables Scenario::to_tables() const {
  ScenarioTables t;
  t.versions = versions_;
  t.datasets = datasets_;
  t.runtimes.reserve(runtimes_.size());
  for (std::size_t d = 0; d < datasets_.size(); ++d) {
    for (std::size_t v = 0; v < versions_.size(); ++v) {
      t.runtimes.push_back({datasets_[d].id, versions_[v].id, runtime(d, v)});
    }
  }
  return t;
}

ScenarioTables read_scenario_tables(std::istream& versions, std::istream& datasets,
                                    std::istream& runtimes) {
  ScenarioTables t;

  const auto vt = read_csv(versions, "versions.csv");
  check_header(vt, {"id", "name", "code_size", "is_baseline"});
  for (std::size_t r = 0; r < vt.rows.size(); ++r) {
    const auto& row = vt.rows[r];
    const auto line = vt.lines[r];
    Version v;
    const auto id = parse_unsigned(row[0], vt.source, line);
    if (id > UINT32_MAX) throw Error(ErrorKind::kParse, "versions.csv:" + std::to_string(line) + ": id out of range");
    v.id = static_cast<VersionId>(id);
    v.name = row[1];
    const auto size = parse_signed(row[2], vt.source, line);
    v.code_size = size < 0 ? 0 : static_cast<std::uint64_t>(size);
    const auto flag = parse_unsigned(row[3], vt.source, line);
    if (flag > 1) {
      throw Error(ErrorKind::kParse,
                  "versions.csv:" + std::to_string(line) + ": is_baseline must be 0 or 1");
    }
    v.is_baseline = flag == 1;
    t.versions.push_back(std::move(v));
  }

  const auto dt = read_csv(datasets, "datasets.csv");
  if (dt.header.size() < 2 || dt.header[0] != "id") {
    throw Error(ErrorKind::kParse, "datasets.csv:1: header must be 'id,f0,...,f{k-1}' with k >= 1");
  }
  for (std::size_t i = 1; i < dt.header.size(); ++i) {
    if (dt.header[i] != "f" + std::to_string(i - 1)) {
      throw Error(ErrorKind::kParse, "datasets.csv:1: column " + std::to_string(i) +
                                         " must be named f" + std::to_string(i - 1));
    }
  }
  for (std::size_t r = 0; r < dt.rows.size(); ++r) {
    const auto& row = dt.rows[r];
    const auto line = dt.lines[r];
    DatasetRecord d;
    const auto id = parse_unsigned(row[0], dt.source, line);
    if (id > UINT32_MAX) throw Error(ErrorKind::kParse, "datasets.csv:" + std::to_string(line) + ": id out of range");
    d.id = static_cast<DatasetId>(id);
    for (std::size_t i = 1; i < row.size(); ++i) {
      d.features.push_back(parse_real(row[i], dt.source, line));
    }
    t.datasets.push_back(std::move(d));
  }

  const auto rt = read_csv(runtimes, "runtimes.csv");
  check_header(rt, {"dataset_id", "version_id", "runtime_seconds"});
  for (std::size_t r = 0; r < rt.rows.size(); ++r) {
    const auto& row = rt.rows[r];
    const auto line = rt.lines[r];
    RuntimeCell c;
    c.dataset = static_cast<DatasetId>(parse_unsigned(row[0], rt.source, line));
    c.version = static_cast<VersionId>(parse_unsigned(row[1], rt.source, line));
    c.seconds = parse_real(row[2], rt.source, line);
    t.runtimes.push_back(c);
  }
  return t;
}

Scenario load_scenario(std::istream& versions, std::istream& datasets, std::istream& runtimes) {
  return Scenario::from_tables(read_scenario_tables(versions, datasets, runtimes));
}

Scenario load_scenario_dir(const std::filesystem::path& dir) {
  auto open = [&](const char* name) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot open " + (dir / name).string());
    return in;
  };
  auto v = open("versions.csv");
  auto d = open("datasets.csv");
  auto r = open("runtimes.csv");
  return load_scenario(v, d, r);
}

void write_versions_csv(std::ostream& out, std::span<const Version> versions) {
  out << "id,name,code_size,is_baseline\n";
  for (const auto& v : versions) {
    out << v.id << ',' << csv_field(v.name) << ',' << v.code_size << ','
        << (v.is_baseline ? 1 : 0) << '\n';
  }
}

void write_datasets_csv(std::ostream& out, std::span<const DatasetRecord> datasets,
                        std::size_t arity) {
  out << "id";
  for (std::size_t i = 0; i < arity; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& d : datasets) {
    out << d.id;
    for (double f : d.features) out << ',' << format_real(f);
    out << '\n';
  }
}

void write_runtimes_csv(std::ostream& out, const Scenario& s) {
  out << "dataset_id,version_id,runtime_seconds\n";
  for (std::size_t d = 0; d < s.num_datasets(); ++d) {
    for (std::size_t v = 0; v < s.num_versions(); ++v) {
      out << s.datasets()[d].id << ',' << s.versions()[v].id << ','
          << format_real(s.runtime(d, v)) << '\n';
    }
  }
}

void write_scenario_dir(const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + (dir / name).string());
    return out;
  };
  auto v = open("versions.csv");
  write_versions_csv(v, s.versions());
  auto d = open("datasets.csv");
  write_datasets_csv(d, s.datasets(), s.feature_arity());
  auto r = open("runtimes.csv");
  write_runtimes_csv(r, s);
}

}  // namespace mvsel
