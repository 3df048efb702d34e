#include "mvsel/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mvsel/csv.hpp"
#include "mvsel/metrics.hpp"
#include "mvsel/rng.hpp"

namespace mvsel {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::kInvalidConfig, "expected a boolean, got '" + std::string(v) + "'");
}

std::uint64_t parse_count(std::string_view v, std::string_view key) {
  try {
    return parse_unsigned(v, "learner", 0);
  } catch (const Error&) {
    throw Error(ErrorKind::kInvalidConfig,
                std::string(key) + " must be a non-negative integer, got '" + std::string(v) + "'");
  }
}

double parse_fraction(std::string_view v, std::string_view key) {
  try {
    return parse_real(v, "learner", 0);
  } catch (const Error&) {
    throw Error(ErrorKind::kInvalidConfig,
                std::string(key) + " must be a number, got '" + std::string(v) + "'");
  }
}

void check_folds(std::size_t n, std::size_t k) {
  if (k < 2) throw Error(ErrorKind::kInvalidConfig, "k must be >= 2");
  if (n < k) {
    throw Error(ErrorKind::kInvalidConfig, "fewer samples (" + std::to_string(n) +
                                               ") than folds (" + std::to_string(k) + ")");
  }
}

struct Classifier {
  std::variant<TreeModel, RuleListModel> model;
  VersionId predict(std::span<const double> x) const {
    if (const auto* t = std::get_if<TreeModel>(&model)) return predict_tree(*t, x).label;
    return predict_rules(std::get<RuleListModel>(model), x).label;
  }
};

Classifier train_classifier(const LearnerSpec& spec, std::span<const LabeledSample> data) {
  if (spec.algorithm == Algorithm::kTree) return {train_tree_classifier(data, spec.tree)};
  if (spec.algorithm == Algorithm::kRules) return {train_rule_list(data, spec.rules)};
  throw Error(ErrorKind::kInvalidConfig,
              std::string(to_string(spec.algorithm)) + " is not a classifier");
}

Regressor train_regressor(const LearnerSpec& spec, std::span<const RegressionSample> data) {
  if (spec.algorithm == Algorithm::kRegTree) return train_regression_tree(data, spec.tree);
  if (spec.algorithm == Algorithm::kLinReg) return train_linear_regression(data);
  throw Error(ErrorKind::kInvalidConfig,
              std::string(to_string(spec.algorithm)) + " is not a regressor");
}

template <typename Sample>
void split_fold(std::span<const Sample> data, const std::vector<std::size_t>& assignment,
                std::size_t fold, std::vector<Sample>& train, std::vector<std::size_t>& test) {
  train.clear();
  test.clear();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (assignment[i] == fold) test.push_back(i);
    else train.push_back(data[i]);
  }
}

// RRSE cross-validation against fixed fold assignment; fills folds/aggregate
// and returns out-of-fold predictions.
std::vector<double> regression_folds(const LearnerSpec& learner,
                                     std::span<const RegressionSample> data,
                                     const std::vector<std::size_t>& assignment, std::size_t k,
                                     CVReport& report) {
  std::vector<double> oof(data.size(), 0.0);
  std::vector<RegressionSample> train;
  std::vector<std::size_t> test;
  double sum = 0.0;
  std::size_t counted = 0;
  double pooled_num = 0.0;
  double pooled_den = 0.0;
  report.folds.clear();
  for (std::size_t f = 0; f < k; ++f) {
    split_fold(data, assignment, f, train, test);
    const auto model = train_regressor(learner, train);
    double mean = 0.0;
    for (const auto& s : train) mean += s.target;
    mean /= static_cast<double>(train.size());
    std::vector<double> pred, actual;
    for (const auto i : test) {
      oof[i] = predict_regressor(model, data[i].features);
      pred.push_back(oof[i]);
      actual.push_back(data[i].target);
      pooled_num += (oof[i] - data[i].target) * (oof[i] - data[i].target);
      pooled_den += (mean - data[i].target) * (mean - data[i].target);
    }
    FoldResult r{train.size(), test.size(), 0.0, false};
    try {
      r.metric = rrse(pred, actual, mean);
      sum += r.metric;
      ++counted;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDegenerateActuals) throw;
      r.degenerate = true;
      r.metric = std::nan("");
    }
    report.folds.push_back(r);
  }
  if (counted == 0) {
    throw Error(ErrorKind::kDegenerateActuals, "every fold has constant actual targets");
  }
  report.aggregate = sum / static_cast<double>(counted);
  report.pooled = pooled_den > 0.0 ? 100.0 * std::sqrt(pooled_num / pooled_den) : std::nan("");
  return oof;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kTree: return "tree";
    case Algorithm::kRules: return "rules";
    case Algorithm::kRegTree: return "regtree";
    case Algorithm::kLinReg: return "linreg";
  }
  return "tree";
}

bool is_classifier(Algorithm a) { return a == Algorithm::kTree || a == Algorithm::kRules; }

void set_learner_option(LearnerSpec& spec, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "algorithm") {
    if (value == "tree") spec.algorithm = Algorithm::kTree;
    else if (value == "rules") spec.algorithm = Algorithm::kRules;
    else if (value == "regtree") spec.algorithm = Algorithm::kRegTree;
    else if (value == "linreg") spec.algorithm = Algorithm::kLinReg;
    else throw Error(ErrorKind::kInvalidConfig, "unknown algorithm '" + std::string(value) + "'");
  } else if (key == "min_split") {
    spec.tree.min_split = parse_count(value, key);
  } else if (key == "max_depth") {
    spec.tree.max_depth = parse_count(value, key);
  } else if (key == "prune") {
    spec.tree.prune = parse_bool(value);
  } else if (key == "prune_holdout") {
    spec.tree.prune_holdout = parse_fraction(value, key);
  } else if (key == "seed") {
    spec.tree.seed = spec.rules.seed = parse_count(value, key);
    spec.seed_set = true;
  } else if (key == "min_cover") {
    spec.rules.min_cover = parse_count(value, key);
  } else if (key == "min_precision") {
    spec.rules.min_precision = parse_fraction(value, key);
  } else {
    throw Error(ErrorKind::kInvalidConfig, "unknown learner key '" + std::string(key) + "'");
  }
}

LearnerSpec parse_learner_spec(std::string_view text) {
  LearnerSpec spec;
  bool min_split_set = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l = line;
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kInvalidConfig,
                  "learner line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(l.substr(0, eq));
    if (key == "min_split") min_split_set = true;
    set_learner_option(spec, key, l.substr(eq + 1));
  }
  if (spec.algorithm == Algorithm::kRegTree && !min_split_set) {
    spec.tree.min_split = TreeConfig::regression_defaults().min_split;
  }
  return spec;
}

std::string render_learner_spec(const LearnerSpec& spec) {
  std::ostringstream out;
  out << "algorithm = " << to_string(spec.algorithm) << '\n';
  switch (spec.algorithm) {
    case Algorithm::kTree:
      out << "min_split = " << spec.tree.min_split << '\n'
          << "max_depth = " << spec.tree.max_depth << '\n'
          << "prune = " << (spec.tree.prune ? "true" : "false") << '\n'
          << "prune_holdout = " << format_real(spec.tree.prune_holdout) << '\n'
          << "seed = " << spec.tree.seed << '\n';
      break;
    case Algorithm::kRegTree:
      out << "min_split = " << spec.tree.min_split << '\n'
          << "max_depth = " << spec.tree.max_depth << '\n';
      break;
    case Algorithm::kRules:
      out << "min_cover = " << spec.rules.min_cover << '\n'
          << "min_precision = " << format_real(spec.rules.min_precision) << '\n'
          << "seed = " << spec.rules.seed << '\n';
      break;
    case Algorithm::kLinReg:
      break;
  }
  return out.str();
}

std::vector<std::size_t> stratified_folds(std::span<const VersionId> labels, std::size_t k,
                                          std::uint64_t seed) {
  check_folds(labels.size(), k);
  std::map<VersionId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Rng rng(derive_seed(seed, 0));
  std::vector<std::size_t> fold(labels.size(), 0);
  std::size_t dealer = 0;
  for (auto& [label, members] : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (const auto i : members) fold[i] = dealer++ % k;
  }
  return fold;
}

std::vector<std::size_t> plain_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  check_folds(n, k);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0));
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> fold(n, 0);
  for (std::size_t p = 0; p < n; ++p) fold[order[p]] = p % k;
  return fold;
}

CVReport cross_validate(const LearnerSpec& learner, std::span<const LabeledSample> data,
                        std::size_t k, std::uint64_t seed) {
  if (!is_classifier(learner.algorithm)) {
    throw Error(ErrorKind::kInvalidConfig, "labelled data needs a classifier (tree or rules)");
  }
  if (data.empty()) throw Error(ErrorKind::kNoTrainingData, "no samples");
  std::vector<VersionId> labels;
  for (const auto& s : data) labels.push_back(s.label);

  CVReport report;
  report.algorithm = learner.algorithm;
  report.k = k;
  report.seed = seed;
  report.samples = data.size();
  report.assignment = stratified_folds(labels, k, seed);

  std::vector<LabeledSample> train;
  std::vector<std::size_t> test;
  std::size_t wrong_total = 0;
  double sum = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    split_fold(data, report.assignment, f, train, test);
    const auto model = train_classifier(learner, train);
    std::vector<VersionId> pred, actual;
    for (const auto i : test) {
      const auto p = model.predict(data[i].features);
      pred.push_back(p);
      actual.push_back(data[i].label);
      ++report.confusion[{data[i].label, p}];
      wrong_total += p != data[i].label;
    }
    const double e = error_rate(pred, actual);
    sum += e;
    report.folds.push_back({train.size(), test.size(), e, false});
  }
  report.aggregate = sum / static_cast<double>(k);
  report.pooled = static_cast<double>(wrong_total) / static_cast<double>(data.size());
  return report;
}

CVReport cross_validate(const LearnerSpec& learner, std::span<const RegressionSample> data,
                        std::size_t k, std::uint64_t seed) {
  if (is_classifier(learner.algorithm)) {
    throw Error(ErrorKind::kInvalidConfig, "regression data needs regtree or linreg");
  }
  if (data.empty()) throw Error(ErrorKind::kNoTrainingData, "no samples");
  CVReport report;
  report.algorithm = learner.algorithm;
  report.k = k;
  report.seed = seed;
  report.samples = data.size();
  report.assignment = plain_folds(data.size(), k, seed);
  regression_folds(learner, data, report.assignment, k, report);
  return report;
}

CVReport cross_validate_ppm(const LearnerSpec& learner, const SpeedupMatrix& matrix,
                            std::span<const std::vector<double>> features,
                            std::span<const VersionId> representative, std::size_t k,
                            std::uint64_t seed) {
  if (is_classifier(learner.algorithm)) {
    throw Error(ErrorKind::kInvalidConfig, "PPM cross-validation needs regtree or linreg");
  }
  const auto n = matrix.num_datasets();
  CVReport report;
  report.algorithm = learner.algorithm;
  report.k = k;
  report.seed = seed;
  report.samples = n;
  report.assignment = plain_folds(n, k, seed);

  // Per-version RRSE over the shared folds, plus out-of-fold predictions for
  // the selection check.
  std::map<VersionId, std::vector<double>> oof;
  std::vector<FoldResult> fold_sum(k);
  std::vector<std::size_t> fold_counted(k, 0);
  double total = 0.0;
  double pooled = 0.0;
  for (const auto id : representative) {
    const auto samples = make_regression_samples(matrix, features, id);
    CVReport per;
    oof[id] = regression_folds(learner, samples, report.assignment, k, per);
    report.version_rrse[id] = per.aggregate;
    total += per.aggregate;
    pooled += per.pooled;
    for (std::size_t f = 0; f < k; ++f) {
      fold_sum[f].train_size = per.folds[f].train_size;
      fold_sum[f].test_size = per.folds[f].test_size;
      if (!per.folds[f].degenerate) {
        fold_sum[f].metric += per.folds[f].metric;
        ++fold_counted[f];
      }
    }
  }
  for (std::size_t f = 0; f < k; ++f) {
    fold_sum[f].degenerate = fold_counted[f] == 0;
    fold_sum[f].metric = fold_counted[f] ? fold_sum[f].metric / static_cast<double>(fold_counted[f])
                                         : std::nan("");
  }
  report.folds = std::move(fold_sum);
  const double versions = static_cast<double>(std::max<std::size_t>(representative.size(), 1));
  report.aggregate = representative.empty() ? 0.0 : total / versions;
  report.pooled = representative.empty() ? 0.0 : pooled / versions;

  // Selection error: argmax of out-of-fold predictions against the true label.
  std::size_t wrong = 0;
  for (std::size_t d = 0; d < n; ++d) {
    const auto truth = best_kept_version(matrix, representative, d);
    VersionId chosen = matrix.baseline_id();
    double best = 0.0;
    std::uint64_t best_size = matrix.code_size(matrix.baseline_index());
    for (const auto id : representative) {
      const double p = oof[id][d];
      const auto size = matrix.code_size(*matrix.version_index(id));
      if (p > best || (p == best && (size < best_size || (size == best_size && id < chosen)))) {
        chosen = id;
        best = p;
        best_size = size;
      }
    }
    ++report.confusion[{truth, chosen}];
    wrong += chosen != truth;
  }
  report.selection_error_rate = static_cast<double>(wrong) / static_cast<double>(n);
  return report;
}

Report make_cv_report(const CVReport& cv) {
  Report report("cv");
  auto& summary = report.keyvalues("summary");
  const bool dc = is_classifier(cv.algorithm);
  Report::put(summary, "algorithm", std::string(to_string(cv.algorithm)));
  Report::put(summary, "model", std::string(dc ? "dc" : "ppm"));
  Report::put(summary, "folds", static_cast<std::int64_t>(cv.k));
  Report::put(summary, "seed", static_cast<std::int64_t>(cv.seed));
  Report::put(summary, "samples", static_cast<std::int64_t>(cv.samples));
  if (dc) {
    Report::put(summary, "error_rate", cv.aggregate);
    Report::put(summary, "pooled_error_rate", cv.pooled);
  } else {
    Report::put(summary, "rrse_percent", cv.aggregate);
    Report::put(summary, "pooled_rrse_percent", cv.pooled);
    Report::put(summary, "selection_error_rate", cv.selection_error_rate);
  }

  auto& folds = report.table("folds", {"fold", "train", "test", dc ? "error_rate" : "rrse_percent"});
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    folds.rows.push_back({static_cast<std::int64_t>(f),
                          static_cast<std::int64_t>(cv.folds[f].train_size),
                          static_cast<std::int64_t>(cv.folds[f].test_size),
                          cv.folds[f].degenerate ? Report::Scalar(std::string("degenerate"))
                                                 : Report::Scalar(cv.folds[f].metric)});
  }
  if (!cv.version_rrse.empty()) {
    auto& versions = report.table("versions", {"version", "rrse_percent"});
    for (const auto& [id, value] : cv.version_rrse) {
      versions.rows.push_back({static_cast<std::int64_t>(id), value});
    }
  }
  if (!cv.confusion.empty()) {
    auto& confusion = report.table("confusion", {"actual", "predicted", "count"});
    for (const auto& [key, count] : cv.confusion) {
      confusion.rows.push_back({static_cast<std::int64_t>(key.first),
                                static_cast<std::int64_t>(key.second),
                                static_cast<std::int64_t>(count)});
    }
  }
  return report;
}

}  // namespace mvsel
