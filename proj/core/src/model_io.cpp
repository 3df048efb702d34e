#include "mvsel/model_io.hpp"

#include <map>
#include <sstream>
#include <vector>

#include "mvsel/csv.hpp"

namespace mvsel {
namespace {

std::string real(double v) { return format_real(v); }

void write_tree(std::ostringstream& out, const TreeModel& t) {
  const bool cls = t.kind == TreeKind::kClassifier;
  out << "MVMODEL v1; kind=" << (cls ? "tree" : "regtree") << "; arity=" << t.arity
      << "; nodes=" << t.nodes.size() << "; depth=" << t.depth << '\n';
  out << "C " << t.config.min_split << ' ' << t.config.max_depth << ' '
      << (t.config.prune ? 1 : 0) << ' ' << real(t.config.prune_holdout) << ' ' << t.config.seed
      << '\n';
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) {
      out << "L " << (cls ? std::to_string(n.label) : real(n.value)) << '\n';
    } else {
      out << "B " << n.feature << ' ' << real(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
          << (cls ? std::to_string(n.label) : real(n.value)) << '\n';
    }
  }
}

void write_linear(std::ostringstream& out, const LinearModel& m) {
  out << "MVMODEL v1; kind=linreg; arity=" << m.coefficients.size() << '\n';
  out << "I " << real(m.intercept) << '\n';
  out << 'W';
  for (const double c : m.coefficients) out << ' ' << real(c);
  out << '\n';
}

void write_rules(std::ostringstream& out, const RuleListModel& m) {
  out << "MVMODEL v1; kind=rules; arity=" << m.arity << "; rules=" << m.rules.size() << '\n';
  out << "C " << m.config.min_cover << ' ' << real(m.config.min_precision) << ' ' << m.config.seed
      << '\n';
  out << "D " << m.default_label << '\n';
  for (const auto& r : m.rules) {
    out << "R " << r.label << ' ' << r.coverage << ' ' << r.correct << ' ' << r.conditions.size();
    for (const auto& c : r.conditions) {
      out << ' ' << c.feature << ' ' << (c.direction == Direction::kLessEqual ? "le" : "gt") << ' '
          << real(c.threshold);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

class Lines {
 public:
  explicit Lines(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(std::move(line));
    }
  }

  bool done() const { return pos_ >= lines_.size(); }
  std::size_t line_no() const { return pos_; }

  std::vector<std::string> next_tokens() {
    while (!done() && lines_[pos_].find_first_not_of(" \t") == std::string::npos) ++pos_;
    if (done()) fail("unexpected end of model");
    std::istringstream in(lines_[pos_++]);
    std::vector<std::string> tokens;
    std::string t;
    while (in >> t) tokens.push_back(t);
    return tokens;
  }

  std::string next_raw() {
    while (!done() && lines_[pos_].find_first_not_of(" \t") == std::string::npos) ++pos_;
    if (done()) fail("unexpected end of model");
    return lines_[pos_++];
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::kParse, "model line " + std::to_string(pos_) + ": " + what);
  }

  double real(const std::string& s) const { return parse_real(s, "model", pos_); }
  std::uint64_t count(const std::string& s) const { return parse_unsigned(s, "model", pos_); }
  std::int64_t integer(const std::string& s) const { return parse_signed(s, "model", pos_); }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

std::map<std::string, std::string> parse_header(Lines& in) {
  const auto raw = in.next_raw();
  constexpr std::string_view magic = "MVMODEL v1";
  if (raw.compare(0, magic.size(), magic) != 0) in.fail("expected 'MVMODEL v1' header");
  std::map<std::string, std::string> fields;
  std::istringstream parts(raw.substr(magic.size()));
  std::string part;
  while (std::getline(parts, part, ';')) {
    const auto b = part.find_first_not_of(' ');
    if (b == std::string::npos) continue;
    part = part.substr(b);
    const auto eq = part.find('=');
    if (eq == std::string::npos) in.fail("malformed header field '" + part + "'");
    fields[part.substr(0, eq)] = part.substr(eq + 1);
  }
  if (!fields.contains("kind") || !fields.contains("arity")) in.fail("header needs kind and arity");
  return fields;
}

TreeModel read_tree(Lines& in, const std::map<std::string, std::string>& h, bool classifier) {
  TreeModel t;
  t.kind = classifier ? TreeKind::kClassifier : TreeKind::kRegressor;
  t.arity = in.count(h.at("arity"));
  if (!h.contains("nodes")) in.fail("tree header needs nodes");
  const auto n = in.count(h.at("nodes"));
  auto c = in.next_tokens();
  if (c.size() != 6 || c[0] != "C") in.fail("expected config line 'C ...'");
  t.config.min_split = in.count(c[1]);
  t.config.max_depth = in.count(c[2]);
  t.config.prune = in.count(c[3]) != 0;
  t.config.prune_holdout = in.real(c[4]);
  t.config.seed = in.count(c[5]);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto tok = in.next_tokens();
    TreeNode node;
    if (tok.size() == 2 && tok[0] == "L") {
      if (classifier) node.label = static_cast<VersionId>(in.count(tok[1]));
      else node.value = in.real(tok[1]);
    } else if (tok.size() == 6 && tok[0] == "B") {
      node.feature = static_cast<std::int32_t>(in.count(tok[1]));
      node.threshold = in.real(tok[2]);
      node.left = static_cast<std::int32_t>(in.integer(tok[3]));
      node.right = static_cast<std::int32_t>(in.integer(tok[4]));
      if (classifier) node.label = static_cast<VersionId>(in.count(tok[5]));
      else node.value = in.real(tok[5]);
    } else {
      in.fail("expected 'B' or 'L' node line");
    }
    t.nodes.push_back(node);
  }
  try {
    check_tree(t);
  } catch (const Error& e) {
    in.fail(e.what());
  }
  t.depth = h.contains("depth") ? in.count(h.at("depth")) : 0;
  return t;
}

LinearModel read_linear(Lines& in, const std::map<std::string, std::string>& h) {
  LinearModel m;
  const auto arity = in.count(h.at("arity"));
  auto i = in.next_tokens();
  if (i.size() != 2 || i[0] != "I") in.fail("expected 'I <intercept>'");
  m.intercept = in.real(i[1]);
  auto w = in.next_tokens();
  if (w.empty() || w[0] != "W" || w.size() != arity + 1) in.fail("expected 'W' with one weight per feature");
  for (std::size_t j = 1; j < w.size(); ++j) m.coefficients.push_back(in.real(w[j]));
  return m;
}

RuleListModel read_rules(Lines& in, const std::map<std::string, std::string>& h) {
  RuleListModel m;
  m.arity = in.count(h.at("arity"));
  if (!h.contains("rules")) in.fail("rules header needs rules");
  const auto n = in.count(h.at("rules"));
  auto c = in.next_tokens();
  if (c.size() != 4 || c[0] != "C") in.fail("expected config line 'C ...'");
  m.config.min_cover = in.count(c[1]);
  m.config.min_precision = in.real(c[2]);
  m.config.seed = in.count(c[3]);
  auto d = in.next_tokens();
  if (d.size() != 2 || d[0] != "D") in.fail("expected 'D <default label>'");
  m.default_label = static_cast<VersionId>(in.count(d[1]));
  for (std::uint64_t r = 0; r < n; ++r) {
    auto tok = in.next_tokens();
    if (tok.size() < 5 || tok[0] != "R") in.fail("expected rule line 'R ...'");
    Rule rule;
    rule.label = static_cast<VersionId>(in.count(tok[1]));
    rule.coverage = in.count(tok[2]);
    rule.correct = in.count(tok[3]);
    const auto conds = in.count(tok[4]);
    if (conds == 0 || tok.size() != 5 + 3 * conds) in.fail("rule condition count mismatch");
    for (std::uint64_t j = 0; j < conds; ++j) {
      Condition cond;
      cond.feature = in.count(tok[5 + 3 * j]);
      const auto& op = tok[6 + 3 * j];
      if (op == "le") cond.direction = Direction::kLessEqual;
      else if (op == "gt") cond.direction = Direction::kGreater;
      else in.fail("unknown comparison '" + op + "'");
      cond.threshold = in.real(tok[7 + 3 * j]);
      if (cond.feature >= m.arity) in.fail("condition feature out of range");
      rule.conditions.push_back(cond);
    }
    m.rules.push_back(std::move(rule));
  }
  return m;
}

PpmModel read_ppm(Lines& in, const std::map<std::string, std::string>& h) {
  PpmModel m;
  if (!h.contains("baseline") || !h.contains("versions")) in.fail("ppm header needs baseline and versions");
  m.baseline = static_cast<VersionId>(in.count(h.at("baseline")));
  const auto n = in.count(h.at("versions"));
  for (std::uint64_t i = 0; i < n + 1; ++i) {
    auto tok = in.next_tokens();
    if (tok.size() != 3 || tok[0] != "S") in.fail("expected 'S <version> <code_size>'");
    m.code_sizes[static_cast<VersionId>(in.count(tok[1]))] = in.count(tok[2]);
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    auto tok = in.next_tokens();
    if (tok.size() != 2 || tok[0] != "V") in.fail("expected 'V <version>'");
    const auto id = static_cast<VersionId>(in.count(tok[1]));
    m.representative.push_back(id);
    const auto sub = parse_header(in);
    if (sub.at("kind") == "regtree") m.models.emplace(id, read_tree(in, sub, false));
    else if (sub.at("kind") == "linreg") m.models.emplace(id, read_linear(in, sub));
    else in.fail("ppm regressors must be regtree or linreg");
  }
  return m;
}

}  // namespace

std::string serialize_model(const ModelFile& model) {
  std::ostringstream out;
  if (const auto* t = std::get_if<TreeModel>(&model)) {
    write_tree(out, *t);
  } else if (const auto* r = std::get_if<RuleListModel>(&model)) {
    write_rules(out, *r);
  } else {
    const auto& p = std::get<PpmModel>(model);
    std::size_t arity = 0;
    if (!p.models.empty()) {
      const auto& first = p.models.begin()->second;
      arity = std::holds_alternative<TreeModel>(first) ? std::get<TreeModel>(first).arity
                                                       : std::get<LinearModel>(first).coefficients.size();
    }
    out << "MVMODEL v1; kind=ppm; arity=" << arity << "; baseline=" << p.baseline
        << "; versions=" << p.representative.size() << '\n';
    out << "S " << p.baseline << ' ' << p.code_sizes.at(p.baseline) << '\n';
    for (const auto id : p.representative) out << "S " << id << ' ' << p.code_sizes.at(id) << '\n';
    for (const auto id : p.representative) {
      out << "V " << id << '\n';
      const auto& reg = p.models.at(id);
      if (const auto* tree = std::get_if<TreeModel>(&reg)) write_tree(out, *tree);
      else write_linear(out, std::get<LinearModel>(reg));
    }
  }
  return out.str();
}

ModelFile parse_model(std::string_view text) {
  Lines in(text);
  const auto header = parse_header(in);
  const auto& kind = header.at("kind");
  if (kind == "tree") return read_tree(in, header, true);
  if (kind == "regtree") return read_tree(in, header, false);
  if (kind == "rules") return read_rules(in, header);
  if (kind == "ppm") return read_ppm(in, header);
  in.fail("unsupported model kind '" + kind + "'");
}

}  // namespace mvsel
