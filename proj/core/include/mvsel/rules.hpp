#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mvsel/samples.hpp"

namespace mvsel {

enum class Direction { kLessEqual, kGreater };

struct Condition {
  std::size_t feature = 0;
  Direction direction = Direction::kLessEqual;
  double threshold = 0.0;

  // kGreater is evaluated as !(x <= t) so every comparison in the library,
  // including the lowered dispatcher, uses the same inclusive-left test.
  bool holds(std::span<const double> x) const {
    const bool le = x[feature] <= threshold;
    return direction == Direction::kLessEqual ? le : !le;
  }
};

struct Rule {
  std::vector<Condition> conditions;
  VersionId label = 0;
  std::size_t coverage = 0;  // training samples covered when the rule was accepted
  std::size_t correct = 0;   // of which carry `label`
};

struct RuleConfig {
  std::size_t min_cover = 2;
  double min_precision = 0.7;
  std::uint64_t seed = 0;  // recorded for provenance; induction is deterministic
};

struct RuleListModel {
  std::size_t arity = 0;
  std::vector<Rule> rules;
  VersionId default_label = 0;
  RuleConfig config;
};

struct RulePrediction {
  VersionId label = 0;
  std::size_t comparisons = 0;      // conditions evaluated
  std::optional<std::size_t> rule;  // index of the firing rule, empty for default
};

// Sequential covering. Classes are handled in ascending training frequency
// (ties: smaller id). Each rule is grown greedily from an empty body by adding
// the single threshold condition with the best precision on the samples it
// still covers (ties: higher coverage, lower feature, lower threshold, <=
// before >) until precision reaches 1 or stops improving. A grown rule is
// kept iff it covers >= min_cover samples at >= min_precision; its samples
// are then removed. The default label is the majority of what remains.
RuleListModel train_rule_list(std::span<const LabeledSample> samples,
                              const RuleConfig& config = {});

RulePrediction predict_rules(const RuleListModel& model, std::span<const double> x);

}  // namespace mvsel
