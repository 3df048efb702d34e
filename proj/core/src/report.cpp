#include "mvsel/report.hpp"

#include <sstream>

#include "mvsel/csv.hpp"
#include "mvsel/error.hpp"

namespace mvsel {
namespace {

int digits(ReportFormat f) { return f == ReportFormat::kStable ? 17 : 6; }

std::string scalar_text(const Report::Scalar& v, ReportFormat f) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* d = std::get_if<double>(&v)) return format_real(*d, digits(f));
  return std::to_string(std::get<std::int64_t>(v));
}

std::string value_text(const Report::Value& v, ReportFormat f) {
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else if constexpr (std::is_same_v<T, double>) {
          return format_real(x, digits(f));
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else {
          std::string out;
          for (const auto& e : x) {
            if (!out.empty()) out += ' ';
            if constexpr (std::is_same_v<std::decay_t<decltype(e)>, double>) {
              out += format_real(e, digits(f));
            } else {
              out += std::to_string(e);
            }
          }
          return out;
        }
      },
      v);
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Report::Section& Report::keyvalues(std::string name) {
  sections_.push_back(Section{std::move(name), false, {}, {}, {}});
  return sections_.back();
}

Report::Section& Report::table(std::string name, std::vector<std::string> columns) {
  sections_.push_back(Section{std::move(name), true, {}, std::move(columns), {}});
  return sections_.back();
}

std::string Report::render(ReportFormat format) const {
  std::ostringstream out;
  out << "# mvsel " << kind_ << " report v1\n";
  bool first = true;
  for (const auto& s : sections_) {
    if (!first) out << '\n';
    first = false;
    if (s.is_table) {
      out << "[table " << s.name << "]\n";
      for (std::size_t i = 0; i < s.columns.size(); ++i) {
        out << (i ? "," : "") << s.columns[i];
      }
      out << '\n';
      for (const auto& row : s.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
          out << (i ? "," : "") << csv_field(scalar_text(row[i], format));
        }
        out << '\n';
      }
    } else {
      out << '[' << s.name << "]\n";
      for (const auto& [k, v] : s.entries) {
        const auto text = value_text(v, format);
        out << k << " =" << (text.empty() ? "" : " ") << text << '\n';
      }
    }
  }
  return out.str();
}

Report Report::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::optional<Report> report;
  Section* current = nullptr;
  bool need_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto l = strip(line);
    if (!report) {
      constexpr std::string_view prefix = "# mvsel ";
      constexpr std::string_view suffix = " report v1";
      if (l.size() <= prefix.size() + suffix.size() || l.substr(0, prefix.size()) != prefix ||
          l.substr(l.size() - suffix.size()) != suffix) {
        throw Error(ErrorKind::kParse, "report line 1: missing '# mvsel <kind> report v1' header");
      }
      report.emplace(std::string(
          l.substr(prefix.size(), l.size() - prefix.size() - suffix.size())));
      continue;
    }
    if (l.empty()) continue;
    if (l.front() == '[' && l.back() == ']') {
      auto name = l.substr(1, l.size() - 2);
      if (name.substr(0, 6) == "table ") {
        current = &report->table(std::string(name.substr(6)), {});
        need_columns = true;
      } else {
        current = &report->keyvalues(std::string(name));
        need_columns = false;
      }
      continue;
    }
    if (current == nullptr) {
      throw Error(ErrorKind::kParse, "report line " + std::to_string(line_no) +
                                         ": content outside a section");
    }
    if (current->is_table) {
      auto cells = split_commas(l);
      if (need_columns) {
        current->columns = std::move(cells);
        need_columns = false;
      } else {
        std::vector<Scalar> row(cells.begin(), cells.end());
        current->rows.push_back(std::move(row));
      }
    } else {
      const auto eq = l.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorKind::kParse,
                    "report line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      current->entries.emplace_back(std::string(strip(l.substr(0, eq))),
                                    std::string(strip(l.substr(eq + 1))));
    }
  }
  if (!report) throw Error(ErrorKind::kParse, "empty report");
  return std::move(*report);
}

const Report::Section* Report::find(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::optional<std::string> Report::get(std::string_view section, std::string_view key) const {
  const auto* s = find(section);
  if (s == nullptr) return std::nullopt;
  for (const auto& [k, v] : s->entries) {
    if (k == key) return value_text(v, ReportFormat::kStable);
  }
  return std::nullopt;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "human") return ReportFormat::kHuman;
  if (name == "stable" || name == "machine" || name == "machine-stable") return ReportFormat::kStable;
  return std::nullopt;
}

}  // namespace mvsel
