#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mvsel {

enum class ReportFormat {
  kHuman,   // 6 significant digits
  kStable,  // 17 significant digits, byte-stable for golden files
};

// Structured text report shared by every command:
//
//   # mvsel <kind> report v1
//   [summary]
//   key = value
//
//   [table <name>]
//   col_a,col_b
//   1,2.5
//
// Lists are space separated. Sections appear in insertion order.
class Report {
 public:
  using Scalar = std::variant<std::string, double, std::int64_t>;
  using Value = std::variant<std::string, double, std::int64_t, std::vector<std::int64_t>,
                             std::vector<double>>;

  struct Section {
    std::string name;
    bool is_table = false;
    std::vector<std::pair<std::string, Value>> entries;
    std::vector<std::string> columns;
    std::vector<std::vector<Scalar>> rows;
  };

  explicit Report(std::string kind) : kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

  Section& keyvalues(std::string name);
  Section& table(std::string name, std::vector<std::string> columns);

  static void put(Section& section, std::string key, Value value) {
    section.entries.emplace_back(std::move(key), std::move(value));
  }

  std::string render(ReportFormat format) const;
  void write(std::ostream& out, ReportFormat format) const { out << render(format); }

  // Parses a rendered report. Values come back as raw strings.
  static Report parse(std::string_view text);

  const Section* find(std::string_view name) const;
  std::optional<std::string> get(std::string_view section, std::string_view key) const;

  const std::deque<Section>& sections() const { return sections_; }

 private:
  std::string kind_;
  std::deque<Section> sections_;
};

std::optional<ReportFormat> parse_report_format(std::string_view name);

}  // namespace mvsel
