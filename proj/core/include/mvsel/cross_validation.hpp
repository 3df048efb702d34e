#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mvsel/ppm.hpp"
#include "mvsel/report.hpp"
#include "mvsel/rules.hpp"
#include "mvsel/tree.hpp"

namespace mvsel {

enum class Algorithm { kTree, kRules, kRegTree, kLinReg };

std::string_view to_string(Algorithm algorithm);
bool is_classifier(Algorithm algorithm);

// Learner descriptor. Text form is one `key = value` per line, '#' starts a
// comment:
//   algorithm = tree | rules | regtree | linreg
//   min_split, max_depth, prune, prune_holdout, seed     (tree, regtree)
//   min_cover, min_precision, seed                       (rules)
struct LearnerSpec {
  Algorithm algorithm = Algorithm::kTree;
  TreeConfig tree;
  RuleConfig rules;
  bool seed_set = false;
};

LearnerSpec parse_learner_spec(std::string_view text);
std::string render_learner_spec(const LearnerSpec& spec);
// Applies one key/value pair; throws kInvalidConfig on unknown keys or values.
void set_learner_option(LearnerSpec& spec, std::string_view key, std::string_view value);

// Fold index per sample. Stratified: classes in ascending id order, each
// class's samples shuffled and dealt round-robin, the dealer position carrying
// over between classes. Plain: one shuffle, then round-robin.
std::vector<std::size_t> stratified_folds(std::span<const VersionId> labels, std::size_t k,
                                          std::uint64_t seed);
std::vector<std::size_t> plain_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct FoldResult {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double metric = 0.0;      // error rate (fraction) or RRSE (percent)
  bool degenerate = false;  // RRSE undefined on this fold; excluded from the mean
};

struct CVReport {
  Algorithm algorithm = Algorithm::kTree;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::vector<std::size_t> assignment;
  std::vector<FoldResult> folds;
  double aggregate = 0.0;  // mean over folds: error rate or RRSE percent
  double pooled = 0.0;     // over all out-of-fold predictions
  std::map<std::pair<VersionId, VersionId>, std::size_t> confusion;  // (actual, predicted)
  // PPM only: per-version aggregate RRSE and the version-selection error.
  std::map<VersionId, double> version_rrse;
  double selection_error_rate = 0.0;
};

CVReport cross_validate(const LearnerSpec& learner, std::span<const LabeledSample> data,
                        std::size_t k = 10, std::uint64_t seed = 0);
CVReport cross_validate(const LearnerSpec& learner, std::span<const RegressionSample> data,
                        std::size_t k = 10, std::uint64_t seed = 0);

// Full PPM protocol over a scenario: one regressor per kept version, plain
// folds shared by all versions. aggregate is the mean per-version RRSE.
CVReport cross_validate_ppm(const LearnerSpec& learner, const SpeedupMatrix& matrix,
                            std::span<const std::vector<double>> features,
                            std::span<const VersionId> representative, std::size_t k = 10,
                            std::uint64_t seed = 0);

Report make_cv_report(const CVReport& cv);

}  // namespace mvsel
