#include "mvsel/tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>

#include "mvsel/rng.hpp"

namespace mvsel {
namespace {

constexpr double kGainEpsilon = 1e-12;

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

double midpoint_between(double a, double b) {
  const double mid = std::midpoint(a, b);
  // Adjacent doubles can round up to b, which would send b left as well.
  return mid < b ? mid : a;
}

std::size_t check_arity(std::span<const std::vector<double>> rows) {
  const auto k = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != k) throw Error(ErrorKind::kFeatureArity, "samples have mixed feature arity");
  }
  if (k == 0) throw Error(ErrorKind::kFeatureArity, "samples need at least one feature");
  return k;
}

void check_config(const TreeConfig& c) {
  if (c.prune && !(c.prune_holdout > 0.0 && c.prune_holdout < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "prune_holdout must lie in (0, 1)");
  }
}

// ---------------------------------------------------------------------------
// classification

class ClassifierBuilder {
 public:
  ClassifierBuilder(std::span<const std::vector<double>> x, std::span<const std::size_t> y,
                    std::span<const VersionId> class_ids, const TreeConfig& config,
                    std::vector<TreeNode>& nodes)
      : x_(x), y_(y), classes_(class_ids), config_(config), nodes_(nodes) {}

  std::int32_t build(std::vector<std::size_t> idx, std::size_t depth) {
    const auto me = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    std::vector<std::size_t> counts(classes_.size(), 0);
    for (const auto i : idx) ++counts[y_[i]];
    // Classes are indexed in ascending id order, so the first maximum is the
    // smallest id among tied majorities.
    const auto majority = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    nodes_[me].label = classes_[majority];
    nodes_[me].samples = idx.size();

    const bool pure = counts[majority] == idx.size();
    if (pure || idx.size() < config_.min_split || depth >= config_.max_depth) return me;

    const auto split = best_split(idx, counts);
    if (!split) return me;

    std::vector<std::size_t> left, right;
    for (const auto i : idx) {
      (x_[i][split->feature] <= split->threshold ? left : right).push_back(i);
    }
    nodes_[me].feature = split->feature;
    nodes_[me].threshold = split->threshold;
    nodes_[me].gain = split->gain;
    idx.clear();
    idx.shrink_to_fit();
    const auto l = build(std::move(left), depth + 1);
    const auto r = build(std::move(right), depth + 1);
    nodes_[me].left = l;
    nodes_[me].right = r;
    return me;
  }

 private:
  std::optional<Split> best_split(const std::vector<std::size_t>& idx,
                                  const std::vector<std::size_t>& counts) const {
    const double n = static_cast<double>(idx.size());
    const double parent = entropy_bits(counts);
    std::optional<Split> best;
    std::vector<std::size_t> order = idx;
    std::vector<std::size_t> left(counts.size());
    std::vector<std::size_t> right(counts.size());
    const auto k = x_[idx.front()].size();
    for (std::size_t f = 0; f < k; ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x_[a][f] < x_[b][f]; });
      std::fill(left.begin(), left.end(), 0);
      right = counts;
      for (std::size_t p = 0; p + 1 < order.size(); ++p) {
        ++left[y_[order[p]]];
        --right[y_[order[p]]];
        const double a = x_[order[p]][f];
        const double b = x_[order[p + 1]][f];
        if (!(a < b)) continue;
        const double nl = static_cast<double>(p + 1);
        const double gain =
            parent - (nl / n) * entropy_bits(left) - ((n - nl) / n) * entropy_bits(right);
        if (gain > kGainEpsilon && (!best || gain > best->gain + kGainEpsilon)) {
          best = Split{static_cast<std::int32_t>(f), midpoint_between(a, b), gain};
        }
      }
    }
    return best;
  }

  std::span<const std::vector<double>> x_;
  std::span<const std::size_t> y_;
  std::span<const VersionId> classes_;
  const TreeConfig& config_;
  std::vector<TreeNode>& nodes_;
};

std::size_t subtree_depth(const std::vector<TreeNode>& nodes, std::int32_t at) {
  const auto& n = nodes[at];
  if (n.is_leaf()) return 0;
  return 1 + std::max(subtree_depth(nodes, n.left), subtree_depth(nodes, n.right));
}

void copy_preorder(const std::vector<TreeNode>& in, std::int32_t at, std::vector<TreeNode>& out) {
  const auto me = static_cast<std::int32_t>(out.size());
  out.push_back(in[at]);
  if (in[at].is_leaf()) {
    out[me].left = out[me].right = -1;
    return;
  }
  const auto l = static_cast<std::int32_t>(out.size());
  copy_preorder(in, in[at].left, out);
  const auto r = static_cast<std::int32_t>(out.size());
  copy_preorder(in, in[at].right, out);
  out[me].left = l;
  out[me].right = r;
}

// Reduced-error pruning: returns holdout errors of the subtree at `at` after
// pruning it, replacing it by its majority leaf whenever that is no worse.
std::size_t reduced_error_prune(std::vector<TreeNode>& nodes, std::int32_t at,
                                std::span<const LabeledSample> holdout,
                                const std::vector<std::size_t>& reach) {
  auto& node = nodes[at];
  std::size_t as_leaf = 0;
  for (const auto i : reach) as_leaf += holdout[i].label != node.label;
  if (node.is_leaf()) return as_leaf;

  std::vector<std::size_t> left, right;
  for (const auto i : reach) {
    (holdout[i].features[node.feature] <= node.threshold ? left : right).push_back(i);
  }
  const auto l = node.left;
  const auto r = node.right;
  const auto kept = reduced_error_prune(nodes, l, holdout, left) +
                    reduced_error_prune(nodes, r, holdout, right);
  auto& again = nodes[at];
  if (as_leaf <= kept) {
    again.feature = -1;
    again.threshold = 0.0;
    again.gain = 0.0;
    return as_leaf;
  }
  return kept;
}

TreeModel grow_classifier(std::span<const LabeledSample> samples, const TreeConfig& config) {
  std::vector<VersionId> classes;
  for (const auto& s : samples) classes.push_back(s.label);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  x.reserve(samples.size());
  for (const auto& s : samples) {
    x.push_back(s.features);
    y.push_back(static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), s.label) - classes.begin()));
  }
  TreeModel model;
  model.kind = TreeKind::kClassifier;
  model.arity = check_arity(x);
  model.config = config;
  std::vector<std::size_t> all(samples.size());
  std::iota(all.begin(), all.end(), 0);
  ClassifierBuilder(x, y, classes, config, model.nodes).build(std::move(all), 0);
  model.depth = subtree_depth(model.nodes, 0);
  return model;
}

// ---------------------------------------------------------------------------
// regression

class RegressionBuilder {
 public:
  RegressionBuilder(std::span<const RegressionSample> samples, const TreeConfig& config,
                    std::vector<TreeNode>& nodes)
      : s_(samples), config_(config), nodes_(nodes) {}

  std::int32_t build(std::vector<std::size_t> idx, std::size_t depth) {
    const auto me = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    double sum = 0.0;
    double lo = s_[idx.front()].target;
    double hi = lo;
    for (const auto i : idx) {
      sum += s_[i].target;
      lo = std::min(lo, s_[i].target);
      hi = std::max(hi, s_[i].target);
    }
    const double mean = sum / static_cast<double>(idx.size());
    nodes_[me].value = mean;
    nodes_[me].samples = idx.size();
    if (lo == hi || idx.size() < config_.min_split || depth >= config_.max_depth) return me;

    const auto split = best_split(idx, mean);
    if (!split) return me;

    std::vector<std::size_t> left, right;
    for (const auto i : idx) {
      (s_[i].features[split->feature] <= split->threshold ? left : right).push_back(i);
    }
    nodes_[me].feature = split->feature;
    nodes_[me].threshold = split->threshold;
    nodes_[me].gain = split->gain;
    idx.clear();
    idx.shrink_to_fit();
    const auto l = build(std::move(left), depth + 1);
    const auto r = build(std::move(right), depth + 1);
    nodes_[me].left = l;
    nodes_[me].right = r;
    return me;
  }

 private:
  std::optional<Split> best_split(const std::vector<std::size_t>& idx, double mean) const {
    // Targets are centred on the node mean before accumulating, which keeps
    // the prefix-sum SSE formula well conditioned.
    const double n = static_cast<double>(idx.size());
    double parent = 0.0;
    for (const auto i : idx) parent += (s_[i].target - mean) * (s_[i].target - mean);
    std::optional<Split> best;
    std::vector<std::size_t> order = idx;
    const auto k = s_[idx.front()].features.size();
    for (std::size_t f = 0; f < k; ++f) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s_[a].features[f] < s_[b].features[f];
      });
      double total = 0.0;
      double total_sq = 0.0;
      for (const auto i : order) {
        const double c = s_[i].target - mean;
        total += c;
        total_sq += c * c;
      }
      double left_sum = 0.0;
      double left_sq = 0.0;
      for (std::size_t p = 0; p + 1 < order.size(); ++p) {
        const double c = s_[order[p]].target - mean;
        left_sum += c;
        left_sq += c * c;
        const double a = s_[order[p]].features[f];
        const double b = s_[order[p + 1]].features[f];
        if (!(a < b)) continue;
        const double nl = static_cast<double>(p + 1);
        const double nr = n - nl;
        const double right_sum = total - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
        const double reduction = parent - sse;
        const double floor = kGainEpsilon * std::max(1.0, parent);
        if (reduction > floor && (!best || reduction > best->gain + floor)) {
          best = Split{static_cast<std::int32_t>(f), midpoint_between(a, b), reduction};
        }
      }
    }
    return best;
  }

  std::span<const RegressionSample> s_;
  const TreeConfig& config_;
  std::vector<TreeNode>& nodes_;
};

}  // namespace

double entropy_bits(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (const auto c : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<bool> prune_holdout_mask(std::span<const LabeledSample> samples,
                                     const TreeConfig& config) {
  // Per class in ascending id order, shuffle that class's sample indices and
  // move round(fraction * count) of them to the holdout.
  std::map<VersionId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < samples.size(); ++i) by_class[samples[i].label].push_back(i);
  Rng rng(config.seed);
  std::vector<bool> held(samples.size(), false);
  for (auto& [label, members] : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    const auto take = static_cast<std::size_t>(
        std::floor(config.prune_holdout * static_cast<double>(members.size()) + 0.5));
    for (std::size_t j = 0; j < take && j < members.size(); ++j) held[members[j]] = true;
  }
  return held;
}

TreeModel train_tree_classifier(std::span<const LabeledSample> samples, const TreeConfig& config) {
  if (samples.empty()) throw Error(ErrorKind::kNoTrainingData, "classifier needs >= 1 sample");
  check_config(config);
  if (!config.prune) return grow_classifier(samples, config);

  const auto held = prune_holdout_mask(samples, config);
  std::vector<LabeledSample> grow, holdout;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (held[i] ? holdout : grow).push_back(samples[i]);
  }
  if (grow.empty() || holdout.empty()) return grow_classifier(samples, config);

  auto model = grow_classifier(grow, config);
  std::vector<std::size_t> reach(holdout.size());
  std::iota(reach.begin(), reach.end(), 0);
  reduced_error_prune(model.nodes, 0, holdout, reach);
  std::vector<TreeNode> compact;
  copy_preorder(model.nodes, 0, compact);
  model.nodes = std::move(compact);
  model.depth = subtree_depth(model.nodes, 0);
  return model;
}

TreeModel train_regression_tree(std::span<const RegressionSample> samples,
                                const TreeConfig& config) {
  if (samples.empty()) throw Error(ErrorKind::kNoTrainingData, "regression tree needs >= 1 sample");
  check_config(config);
  std::vector<std::vector<double>> rows;
  for (const auto& s : samples) {
    if (!std::isfinite(s.target)) throw Error(ErrorKind::kInvalidConfig, "regression target not finite");
    rows.push_back(s.features);
  }
  TreeModel model;
  model.kind = TreeKind::kRegressor;
  model.arity = check_arity(rows);
  model.config = config;
  model.config.prune = false;
  std::vector<std::size_t> all(samples.size());
  std::iota(all.begin(), all.end(), 0);
  RegressionBuilder(samples, config, model.nodes).build(std::move(all), 0);
  model.depth = subtree_depth(model.nodes, 0);
  return model;
}

TreePrediction predict_tree(const TreeModel& model, std::span<const double> x) {
  if (x.size() != model.arity) {
    throw Error(ErrorKind::kFeatureArity, "expected " + std::to_string(model.arity) +
                                              " features, got " + std::to_string(x.size()));
  }
  TreePrediction p;
  std::size_t at = 0;
  while (!model.nodes[at].is_leaf()) {
    const auto& n = model.nodes[at];
    ++p.comparisons;
    at = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  p.leaf = at;
  p.label = model.nodes[at].label;
  p.value = model.nodes[at].value;
  return p;
}

void check_tree(const TreeModel& model) {
  if (model.nodes.empty()) throw Error(ErrorKind::kInvalidDispatcher, "tree has no nodes");
  const auto n = static_cast<std::int32_t>(model.nodes.size());
  std::vector<int> parents(model.nodes.size(), 0);
  for (std::int32_t i = 0; i < n; ++i) {
    const auto& node = model.nodes[i];
    if (node.is_leaf()) continue;
    if (static_cast<std::size_t>(node.feature) >= model.arity) {
      throw Error(ErrorKind::kFeatureArity,
                  "node " + std::to_string(i) + " tests feature " + std::to_string(node.feature));
    }
    // Pre-order layout: children always come after their parent.
    if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
      throw Error(ErrorKind::kInvalidDispatcher,
                  "node " + std::to_string(i) + " has an out-of-order child index");
    }
    ++parents[node.left];
    ++parents[node.right];
  }
  for (std::int32_t i = 1; i < n; ++i) {
    if (parents[i] != 1) {
      throw Error(ErrorKind::kInvalidDispatcher,
                  "node " + std::to_string(i) + " has " + std::to_string(parents[i]) + " parents");
    }
  }
}

}  // namespace mvsel
