#include "mvsel/dispatch.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "mvsel/csv.hpp"

namespace mvsel {
namespace {

constexpr std::string_view kMagic = "MVDISPATCH v1";

// Lowers an ordered rule list into a tree. Each node knows the feature box
// (lo, hi] its inputs lie in, so conditions already decided by earlier
// branches are skipped instead of re-tested.
class RuleLowering {
 public:
  RuleLowering(const RuleListModel& model, std::vector<DispatchNode>& nodes)
      : model_(model), nodes_(nodes) {}

  std::size_t lower_from(std::size_t rule, std::vector<double>& lo, std::vector<double>& hi) {
    if (rule == model_.rules.size()) return leaf(model_.default_label);
    return lower_condition(rule, 0, lo, hi);
  }

 private:
  std::size_t leaf(VersionId v) {
    guard();
    nodes_.push_back(DispatchNode{false, 0, 0.0, 0, 0, v});
    return nodes_.size() - 1;
  }

  void guard() const {
    if (nodes_.size() >= kMaxDispatchNodes) {
      throw Error(ErrorKind::kInvalidDispatcher, "rule list lowers to more than " +
                                                     std::to_string(kMaxDispatchNodes) + " nodes");
    }
  }

  std::size_t lower_condition(std::size_t rule, std::size_t cond, std::vector<double>& lo,
                              std::vector<double>& hi) {
    const auto& r = model_.rules[rule];
    if (cond == r.conditions.size()) return leaf(r.label);
    const auto& c = r.conditions[cond];
    const auto f = c.feature;
    const double t = c.threshold;
    const bool le_always = hi[f] <= t;
    const bool le_never = lo[f] >= t;
    const bool want_le = c.direction == Direction::kLessEqual;
    if (le_always || le_never) {
      const bool holds = le_always == want_le;
      return holds ? lower_condition(rule, cond + 1, lo, hi) : lower_from(rule + 1, lo, hi);
    }

    guard();
    const auto me = nodes_.size();
    nodes_.push_back(DispatchNode{true, f, t, 0, 0, 0});

    const double saved_hi = hi[f];
    hi[f] = t;
    const auto left = want_le ? lower_condition(rule, cond + 1, lo, hi) : lower_from(rule + 1, lo, hi);
    hi[f] = saved_hi;

    const double saved_lo = lo[f];
    lo[f] = t;
    const auto right = want_le ? lower_from(rule + 1, lo, hi) : lower_condition(rule, cond + 1, lo, hi);
    lo[f] = saved_lo;

    // Both outcomes reach the same version: drop the comparison.
    if (!nodes_[left].is_branch && !nodes_[right].is_branch &&
        nodes_[left].version == nodes_[right].version && right + 1 == nodes_.size() &&
        left + 1 == right) {
      const auto v = nodes_[left].version;
      nodes_.resize(me);
      nodes_.push_back(DispatchNode{false, 0, 0.0, 0, 0, v});
      return me;
    }
    nodes_[me].left = left;
    nodes_[me].right = right;
    return me;
  }

  const RuleListModel& model_;
  std::vector<DispatchNode>& nodes_;
};

std::size_t depth_from(const std::vector<DispatchNode>& nodes, std::size_t at) {
  if (!nodes[at].is_branch) return 0;
  return 1 + std::max(depth_from(nodes, nodes[at].left), depth_from(nodes, nodes[at].right));
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kParse, "dispatcher line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::size_t DispatcherSpec::byte_size() const { return serialize(*this).size(); }

std::size_t DispatcherSpec::depth() const { return nodes.empty() ? 0 : depth_from(nodes, 0); }

std::size_t DispatcherSpec::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const DispatchNode& n) { return !n.is_branch; }));
}

std::vector<VersionId> DispatcherSpec::leaf_versions() const {
  std::vector<VersionId> out;
  for (const auto& n : nodes) {
    if (!n.is_branch) out.push_back(n.version);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DispatcherSpec compile_dispatcher(const TreeModel& model) {
  if (model.kind != TreeKind::kClassifier) {
    throw Error(ErrorKind::kInvalidDispatcher, "only classification trees select versions");
  }
  check_tree(model);
  DispatcherSpec spec;
  spec.feature_arity = model.arity;
  spec.model_kind = DispatchModelKind::kTree;
  spec.nodes.reserve(model.nodes.size());
  for (const auto& n : model.nodes) {
    if (n.is_leaf()) {
      spec.nodes.push_back(DispatchNode{false, 0, 0.0, 0, 0, n.label});
    } else {
      spec.nodes.push_back(DispatchNode{true, static_cast<std::size_t>(n.feature), n.threshold,
                                        static_cast<std::size_t>(n.left),
                                        static_cast<std::size_t>(n.right), 0});
    }
  }
  validate_dispatcher(spec);
  return spec;
}

DispatcherSpec compile_dispatcher(const RuleListModel& model) {
  for (const auto& r : model.rules) {
    for (const auto& c : r.conditions) {
      if (c.feature >= model.arity) {
        throw Error(ErrorKind::kFeatureArity, "rule tests feature " + std::to_string(c.feature) +
                                                  " but arity is " + std::to_string(model.arity));
      }
    }
  }
  DispatcherSpec spec;
  spec.feature_arity = model.arity;
  spec.model_kind = DispatchModelKind::kRulesLoweredToTree;
  std::vector<double> lo(model.arity, -std::numeric_limits<double>::infinity());
  std::vector<double> hi(model.arity, std::numeric_limits<double>::infinity());
  RuleLowering(model, spec.nodes).lower_from(0, lo, hi);
  validate_dispatcher(spec);
  return spec;
}

void validate_dispatcher(const DispatcherSpec& spec) {
  const auto n = spec.nodes.size();
  if (n == 0) throw Error(ErrorKind::kInvalidDispatcher, "no nodes");
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const auto at = stack.back();
    stack.pop_back();
    if (seen[at]) {
      throw Error(ErrorKind::kInvalidDispatcher,
                  "node " + std::to_string(at) + " is reachable twice (cycle or shared node)");
    }
    seen[at] = 1;
    ++visited;
    const auto& node = spec.nodes[at];
    if (!node.is_branch) continue;
    if (node.feature >= spec.feature_arity) {
      throw Error(ErrorKind::kInvalidDispatcher, "node " + std::to_string(at) + " tests feature " +
                                                     std::to_string(node.feature) + " >= arity");
    }
    if (node.left >= n || node.right >= n) {
      throw Error(ErrorKind::kInvalidDispatcher,
                  "node " + std::to_string(at) + " has a child index out of range");
    }
    stack.push_back(node.right);
    stack.push_back(node.left);
  }
  if (visited != n) {
    throw Error(ErrorKind::kInvalidDispatcher,
                std::to_string(n - visited) + " nodes are unreachable from the entry");
  }
}

void check_leaf_versions(const DispatcherSpec& spec, std::span<const VersionId> allowed) {
  for (const auto v : spec.leaf_versions()) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      throw Error(ErrorKind::kInvalidDispatcher,
                  "leaf selects version " + std::to_string(v) + " outside the representative set");
    }
  }
}

DispatchResult eval_dispatcher(const DispatcherSpec& spec, std::span<const double> x) {
  if (x.size() != spec.feature_arity) {
    throw Error(ErrorKind::kFeatureArity, "expected " + std::to_string(spec.feature_arity) +
                                              " features, got " + std::to_string(x.size()));
  }
  const auto n = spec.nodes.size();
  if (n == 0) throw Error(ErrorKind::kInvalidDispatcher, "no nodes");
  DispatchResult r;
  std::size_t at = 0;
  for (std::size_t steps = 0; steps <= n; ++steps) {
    const auto& node = spec.nodes[at];
    if (!node.is_branch) {
      r.version = node.version;
      return r;
    }
    if (node.feature >= x.size()) throw Error(ErrorKind::kInvalidDispatcher, "feature out of range");
    ++r.comparisons;
    at = x[node.feature] <= node.threshold ? node.left : node.right;
    if (at >= n) throw Error(ErrorKind::kInvalidDispatcher, "child index out of range");
  }
  throw Error(ErrorKind::kInvalidDispatcher, "evaluation did not terminate (cycle)");
}

std::string serialize(const DispatcherSpec& spec) {
  std::string out;
  out += kMagic;
  out += "; arity=" + std::to_string(spec.feature_arity) + "; nodes=" +
         std::to_string(spec.nodes.size()) + "\n";
  for (const auto& n : spec.nodes) {
    if (n.is_branch) {
      out += "B " + std::to_string(n.feature) + ' ' + format_real(n.threshold) + ' ' +
             std::to_string(n.left) + ' ' + std::to_string(n.right) + '\n';
    } else {
      out += "L " + std::to_string(n.version) + '\n';
    }
  }
  return out;
}

DispatcherSpec deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) parse_fail(1, "empty input");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  DispatcherSpec spec;
  std::size_t expected = 0;
  {
    const std::string prefix = std::string(kMagic) + "; arity=";
    if (line.compare(0, prefix.size(), prefix) != 0) {
      parse_fail(line_no, "expected header 'MVDISPATCH v1; arity=<k>; nodes=<n>'");
    }
    const auto rest = line.substr(prefix.size());
    const auto semi = rest.find("; nodes=");
    if (semi == std::string::npos) parse_fail(line_no, "header is missing '; nodes='");
    try {
      spec.feature_arity = parse_unsigned(rest.substr(0, semi), "dispatcher", line_no);
      expected = parse_unsigned(rest.substr(semi + 8), "dispatcher", line_no);
    } catch (const Error&) {
      parse_fail(line_no, "malformed header numbers");
    }
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    std::string t;
    while (fields >> t) tok.push_back(t);
    DispatchNode node;
    try {
      if (tok.size() == 2 && tok[0] == "L") {
        const auto v = parse_unsigned(tok[1], "dispatcher", line_no);
        if (v > UINT32_MAX) parse_fail(line_no, "version id out of range");
        node.version = static_cast<VersionId>(v);
      } else if (tok.size() == 5 && tok[0] == "B") {
        node.is_branch = true;
        node.feature = parse_unsigned(tok[1], "dispatcher", line_no);
        node.threshold = parse_real(tok[2], "dispatcher", line_no);
        node.left = parse_unsigned(tok[3], "dispatcher", line_no);
        node.right = parse_unsigned(tok[4], "dispatcher", line_no);
      } else {
        parse_fail(line_no, "expected 'B <feat> <threshold> <left> <right>' or 'L <version>'");
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kParse && e.detail().rfind("dispatcher line", 0) == 0) throw;
      parse_fail(line_no, e.detail());
    }
    if (node.is_branch) {
      if (node.feature >= spec.feature_arity) parse_fail(line_no, "feature index >= arity");
      if (node.left >= expected || node.right >= expected) {
        parse_fail(line_no, "child index out of range (nodes=" + std::to_string(expected) + ")");
      }
    }
    spec.nodes.push_back(node);
  }
  if (spec.nodes.size() != expected) {
    parse_fail(line_no, "header announces " + std::to_string(expected) + " nodes, found " +
                            std::to_string(spec.nodes.size()));
  }
  try {
    validate_dispatcher(spec);
  } catch (const Error& e) {
    parse_fail(line_no, e.detail());
  }
  return spec;
}

CodeGrowth code_growth(std::span<const VersionId> representative,
                       const std::map<VersionId, std::uint64_t>& code_sizes,
                       std::uint64_t baseline_binary_size, const DispatcherSpec& spec) {
  if (baseline_binary_size == 0) {
    throw Error(ErrorKind::kInvalidConfig, "zero baseline size");
  }
  const double base = static_cast<double>(baseline_binary_size);
  CodeGrowth g;
  double total = 0.0;
  for (const auto id : representative) {
    const auto it = code_sizes.find(id);
    if (it == code_sizes.end()) throw Error(ErrorKind::kUnknownVersion, "version " + std::to_string(id));
    total += static_cast<double>(it->second);
  }
  g.multiversioning_growth = total / base;
  g.selector_growth = static_cast<double>(spec.byte_size()) / base;
  return g;
}

}  // namespace mvsel
