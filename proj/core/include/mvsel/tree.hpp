#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mvsel/samples.hpp"

namespace mvsel {

enum class TreeKind { kClassifier, kRegressor };

// Internal nodes test `x[feature] <= threshold` (true goes left). Leaves have
// feature == -1. Internal nodes keep the majority label / mean target of the
// training samples that reached them, which pruning turns into leaf values.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  VersionId label = 0;
  double value = 0.0;
  double gain = 0.0;  // information gain (bits) or SSE reduction of the split
  std::size_t samples = 0;

  bool is_leaf() const { return feature < 0; }
};

struct TreeConfig {
  std::size_t min_split = 2;
  std::size_t max_depth = 64;
  bool prune = false;
  double prune_holdout = 0.2;
  std::uint64_t seed = 0;

  static TreeConfig regression_defaults() {
    TreeConfig c;
    c.min_split = 4;
    return c;
  }
};

// Nodes are stored in pre-order with the root at index 0.
struct TreeModel {
  TreeKind kind = TreeKind::kClassifier;
  std::size_t arity = 0;
  std::vector<TreeNode> nodes;
  std::size_t depth = 0;
  TreeConfig config;

  std::size_t leaf_count() const;
};

struct TreePrediction {
  VersionId label = 0;
  double value = 0.0;
  std::size_t comparisons = 0;
  std::size_t leaf = 0;
};

// Entropy in bits of a class-count histogram.
double entropy_bits(std::span<const std::size_t> counts);

TreeModel train_tree_classifier(std::span<const LabeledSample> samples,
                                const TreeConfig& config = {});

TreeModel train_regression_tree(std::span<const RegressionSample> samples,
                                const TreeConfig& config = TreeConfig::regression_defaults());

// Stratified seeded holdout used by reduced-error pruning; true marks a
// holdout sample. When either side would be empty the tree is grown unpruned.
std::vector<bool> prune_holdout_mask(std::span<const LabeledSample> samples,
                                     const TreeConfig& config);

// Routes x to its leaf. Throws kFeatureArity on size mismatch.
TreePrediction predict_tree(const TreeModel& model, std::span<const double> x);

// Structural check: indices in range, pre-order acyclic layout, features < arity.
void check_tree(const TreeModel& model);

}  // namespace mvsel
