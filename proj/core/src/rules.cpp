#include "mvsel/rules.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

namespace mvsel {
namespace {

struct Candidate {
  Condition condition;
  std::size_t positives = 0;
  std::size_t covered = 0;
};

// a/b > c/d without division. Sample counts stay far below 2^32.
bool ratio_greater(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  return static_cast<std::uint64_t>(a) * d > static_cast<std::uint64_t>(c) * b;
}

bool ratio_equal(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  return static_cast<std::uint64_t>(a) * d == static_cast<std::uint64_t>(c) * b;
}

bool better(const Candidate& a, const Candidate& b) {
  if (!ratio_equal(a.positives, a.covered, b.positives, b.covered)) {
    return ratio_greater(a.positives, a.covered, b.positives, b.covered);
  }
  if (a.covered != b.covered) return a.covered > b.covered;
  if (a.condition.feature != b.condition.feature) return a.condition.feature < b.condition.feature;
  if (a.condition.threshold != b.condition.threshold) {
    return a.condition.threshold < b.condition.threshold;
  }
  return a.condition.direction == Direction::kLessEqual &&
         b.condition.direction == Direction::kGreater;
}

double midpoint_between(double a, double b) {
  const double mid = std::midpoint(a, b);
  return mid < b ? mid : a;
}

VersionId majority(std::span<const LabeledSample> samples, std::span<const std::size_t> idx) {
  std::map<VersionId, std::size_t> counts;
  for (const auto i : idx) ++counts[samples[i].label];
  VersionId best = counts.begin()->first;
  std::size_t best_n = 0;
  for (const auto& [label, n] : counts) {
    if (n > best_n) {
      best = label;
      best_n = n;
    }
  }
  return best;
}

std::optional<Candidate> best_refinement(std::span<const LabeledSample> samples,
                                         const std::vector<std::size_t>& covered, VersionId target,
                                         std::size_t arity) {
  std::optional<Candidate> best;
  std::vector<std::size_t> order = covered;
  std::size_t total_pos = 0;
  for (const auto i : covered) total_pos += samples[i].label == target;
  for (std::size_t f = 0; f < arity; ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return samples[a].features[f] < samples[b].features[f];
    });
    std::size_t left_pos = 0;
    for (std::size_t p = 0; p + 1 < order.size(); ++p) {
      left_pos += samples[order[p]].label == target;
      const double a = samples[order[p]].features[f];
      const double b = samples[order[p + 1]].features[f];
      if (!(a < b)) continue;
      const double t = midpoint_between(a, b);
      const std::size_t left_n = p + 1;
      const Candidate le{{f, Direction::kLessEqual, t}, left_pos, left_n};
      const Candidate gt{{f, Direction::kGreater, t}, total_pos - left_pos, order.size() - left_n};
      for (const auto& c : {le, gt}) {
        if (!best || better(c, *best)) best = c;
      }
    }
  }
  return best;
}

}  // namespace

RuleListModel train_rule_list(std::span<const LabeledSample> samples, const RuleConfig& config) {
  if (samples.empty()) throw Error(ErrorKind::kNoTrainingData, "rule learner needs >= 1 sample");
  if (!(config.min_precision >= 0.0 && config.min_precision <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "min_precision must lie in [0, 1]");
  }
  RuleListModel model;
  model.config = config;
  model.arity = samples.front().features.size();
  for (const auto& s : samples) {
    if (s.features.size() != model.arity || model.arity == 0) {
      throw Error(ErrorKind::kFeatureArity, "samples have mixed or zero feature arity");
    }
  }

  std::map<VersionId, std::size_t> freq;
  for (const auto& s : samples) ++freq[s.label];
  std::vector<std::pair<std::size_t, VersionId>> order;
  for (const auto& [label, n] : freq) order.emplace_back(n, label);
  std::sort(order.begin(), order.end());

  std::vector<std::size_t> remaining(samples.size());
  std::iota(remaining.begin(), remaining.end(), 0);

  for (const auto& [count, target] : order) {
    while (true) {
      const bool any = std::any_of(remaining.begin(), remaining.end(),
                                   [&](std::size_t i) { return samples[i].label == target; });
      if (!any) break;

      Rule rule;
      rule.label = target;
      std::vector<std::size_t> covered = remaining;
      std::size_t pos = 0;
      for (const auto i : covered) pos += samples[i].label == target;
      while (pos < covered.size()) {
        const auto cand = best_refinement(samples, covered, target, model.arity);
        if (!cand || !ratio_greater(cand->positives, cand->covered, pos, covered.size())) break;
        rule.conditions.push_back(cand->condition);
        std::erase_if(covered, [&](std::size_t i) {
          return !cand->condition.holds(samples[i].features);
        });
        pos = cand->positives;
      }

      const bool precise = static_cast<double>(pos) >=
                           config.min_precision * static_cast<double>(covered.size());
      if (rule.conditions.empty() || covered.size() < config.min_cover || !precise) break;

      rule.coverage = covered.size();
      rule.correct = pos;
      model.rules.push_back(std::move(rule));
      std::erase_if(remaining, [&](std::size_t i) {
        return std::binary_search(covered.begin(), covered.end(), i);
      });
    }
  }

  if (remaining.empty()) {
    std::vector<std::size_t> all(samples.size());
    std::iota(all.begin(), all.end(), 0);
    model.default_label = majority(samples, all);
  } else {
    model.default_label = majority(samples, remaining);
  }
  return model;
}

RulePrediction predict_rules(const RuleListModel& model, std::span<const double> x) {
  if (x.size() != model.arity) {
    throw Error(ErrorKind::kFeatureArity, "expected " + std::to_string(model.arity) +
                                              " features, got " + std::to_string(x.size()));
  }
  RulePrediction p;
  for (std::size_t r = 0; r < model.rules.size(); ++r) {
    bool fires = true;
    for (const auto& c : model.rules[r].conditions) {
      ++p.comparisons;
      if (!c.holds(x)) {
        fires = false;
        break;
      }
    }
    if (fires) {
      p.label = model.rules[r].label;
      p.rule = r;
      return p;
    }
  }
  p.label = model.default_label;
  return p;
}

}  // namespace mvsel
