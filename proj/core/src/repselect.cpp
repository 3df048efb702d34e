#include "mvsel/repselect.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "mvsel/csv.hpp"

namespace mvsel {
namespace {

constexpr double kCoverTolerance = 1e-9;

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Per-cell contribution to f; the baseline always contributes 0.
double cell_value(const SpeedupMatrix& m, std::size_t v, std::size_t d, Aggregate agg) {
  return agg == Aggregate::kLogSum ? m.log_speedup(v, d) : m.speedup(v, d) - 1.0;
}

std::vector<std::size_t> resolve(const SpeedupMatrix& m, std::span<const VersionId> subset) {
  std::vector<std::size_t> out;
  out.reserve(subset.size());
  for (const auto id : subset) {
    const auto idx = m.version_index(id);
    if (!idx) throw Error(ErrorKind::kUnknownVersion, "version " + std::to_string(id));
    if (*idx == m.baseline_index()) {
      throw Error(ErrorKind::kUnknownVersion,
                  "version " + std::to_string(id) + " is the baseline, not a candidate");
    }
    if (std::find(out.begin(), out.end(), *idx) != out.end()) {
      throw Error(ErrorKind::kDuplicateId, "version " + std::to_string(id) + " listed twice");
    }
    out.push_back(*idx);
  }
  return out;
}

double objective_of(const SpeedupMatrix& m, std::span<const std::size_t> members, Aggregate agg) {
  double f = 0.0;
  for (std::size_t d = 0; d < m.num_datasets(); ++d) {
    double best = 0.0;
    for (const auto v : members) best = std::max(best, cell_value(m, v, d, agg));
    f += best;
  }
  return f;
}

// Best speedup per dataset over members + baseline.
std::vector<double> best_speedups(const SpeedupMatrix& m, std::span<const std::size_t> members) {
  std::vector<double> best(m.num_datasets(), 1.0);
  for (std::size_t d = 0; d < m.num_datasets(); ++d) {
    for (const auto v : members) best[d] = std::max(best[d], m.speedup(v, d));
  }
  return best;
}

std::vector<double> oracle_speedups(const SpeedupMatrix& m) {
  return best_speedups(m, m.candidate_indices());
}

double max_loss(const std::vector<double>& oracle, const std::vector<double>& best) {
  double worst = 0.0;
  for (std::size_t d = 0; d < oracle.size(); ++d) worst = std::max(worst, oracle[d] / best[d] - 1.0);
  return worst;
}

// Orders ascending-id subsets encoded as bitmasks lexicographically.
bool lex_less(std::uint32_t a, std::uint32_t b) {
  if (a == b) return false;
  const std::uint32_t diff = a ^ b;
  const std::uint32_t low = diff & (~diff + 1u);
  const std::uint32_t above = ~((low << 1) - 1u);
  // At the first differing position the list holding the lower id is
  // smaller, unless the other list already ended (a prefix sorts first).
  if (a & low) return (b & above) != 0;
  return (a & above) == 0;
}

std::vector<VersionId> ids_of(const SpeedupMatrix& m, std::span<const std::size_t> members) {
  std::vector<VersionId> ids;
  ids.reserve(members.size());
  for (const auto v : members) ids.push_back(m.version_id(v));
  return ids;
}

void finish(const SpeedupMatrix& m, RepresentativeSet& set, const Constraints& c,
            std::uint64_t baseline_binary_size) {
  const auto members = resolve(m, set.selected);
  set.objective_value = objective_of(m, members, c.aggregate);
  const auto metrics = evaluate_set(m, set.selected);
  set.geomean_speedup = metrics.geomean_speedup;
  set.max_dataset_loss = metrics.max_loss();
  set.size_bytes = 0;
  for (const auto v : members) set.size_bytes += m.code_size(v);
  set.size_fraction = static_cast<double>(set.size_bytes) / static_cast<double>(baseline_binary_size);
  set.size_used = std::isinf(c.size_budget) ? 0.0
                  : c.size_budget == 0.0    ? (set.size_bytes == 0 ? 0.0 : 1.0)
                                            : set.size_fraction / c.size_budget;
  set.loss_target_met = set.max_dataset_loss <= c.loss_tolerance;
}

}  // namespace

void validate(const Constraints& c) {
  if (c.max_versions < 1) throw Error(ErrorKind::kInvalidConfig, "max_versions must be >= 1");
  if (!(c.size_budget >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "size budget must be >= 0");
  if (!(c.loss_tolerance >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "loss tolerance must be >= 0");
  }
  if (!(c.min_gain >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "min gain must be >= 0");
}

double SetMetrics::max_loss() const {
  double worst = 0.0;
  for (const double l : per_dataset_loss) worst = std::max(worst, l);
  return worst;
}

double objective(const SpeedupMatrix& matrix, std::span<const VersionId> subset, Aggregate agg) {
  const auto members = resolve(matrix, subset);
  return objective_of(matrix, members, agg);
}

RepresentativeSet greedy_picks(const SpeedupMatrix& m, std::uint64_t baseline_binary_size,
                               const Constraints& c) {
  validate(c);
  if (baseline_binary_size == 0) {
    throw Error(ErrorKind::kInvalidConfig, "baseline binary size must be positive");
  }
  const auto candidates = m.candidate_indices();
  if (candidates.empty()) throw Error(ErrorKind::kNoCandidates, "matrix holds only the baseline");

  const auto nd = m.num_datasets();
  const double budget_bytes = c.size_budget * static_cast<double>(baseline_binary_size);
  const auto oracle = oracle_speedups(m);

  RepresentativeSet set;
  std::vector<std::size_t> members;
  std::vector<bool> taken(m.num_versions(), false);
  std::vector<double> current(nd, 0.0);
  std::vector<double> best_speed(nd, 1.0);
  double f = 0.0;
  double used = 0.0;

  while (true) {
    if (c.mode == Priority::kSize && max_loss(oracle, best_speed) <= c.loss_tolerance) break;
    if (members.size() >= c.max_versions) break;

    std::optional<std::size_t> best;
    double best_delta = 0.0;
    for (const auto v : candidates) {
      if (taken[v]) continue;
      if (used + static_cast<double>(m.code_size(v)) > budget_bytes) continue;
      double delta = 0.0;
      for (std::size_t d = 0; d < nd; ++d) {
        delta += std::max(0.0, cell_value(m, v, d, c.aggregate) - current[d]);
      }
      // Candidates arrive in ascending id order, so equal size keeps the
      // smaller id.
      if (!best || (delta > best_delta && !nearly_equal(delta, best_delta)) ||
          (nearly_equal(delta, best_delta) && m.code_size(v) < m.code_size(*best))) {
        best = v;
        best_delta = delta;
      }
    }
    if (!best || best_delta < c.min_gain) break;

    const auto v = *best;
    taken[v] = true;
    members.push_back(v);
    used += static_cast<double>(m.code_size(v));
    for (std::size_t d = 0; d < nd; ++d) {
      current[d] = std::max(current[d], cell_value(m, v, d, c.aggregate));
      best_speed[d] = std::max(best_speed[d], m.speedup(v, d));
    }
    f = objective_of(m, members, c.aggregate);
    set.trace.push_back({m.version_id(v), best_delta, f});
  }

  set.selected = ids_of(m, members);
  finish(m, set, c, baseline_binary_size);
  return set;
}

RepresentativeSet greedy_select(const SpeedupMatrix& m, std::uint64_t baseline_binary_size,
                                const Constraints& c) {
  auto set = greedy_picks(m, baseline_binary_size, c);
  set.selected = prune_redundant(m, set.selected, c, &set.pruned);
  finish(m, set, c, baseline_binary_size);
  return set;
}

std::vector<VersionId> prune_redundant(const SpeedupMatrix& m, std::span<const VersionId> selected,
                                       const Constraints& c, std::vector<VersionId>* removed) {
  auto members = resolve(m, selected);
  const auto oracle = oracle_speedups(m);
  while (!members.empty()) {
    const double f = objective_of(m, members, c.aggregate);
    std::optional<std::size_t> pick;
    double pick_decrease = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      std::vector<std::size_t> rest;
      rest.reserve(members.size() - 1);
      for (std::size_t j = 0; j < members.size(); ++j) {
        if (j != i) rest.push_back(members[j]);
      }
      const double decrease = f - objective_of(m, rest, c.aggregate);
      const auto v = members[i];
      bool better = !pick;
      if (!better) {
        const auto w = members[*pick];
        if (nearly_equal(decrease, pick_decrease)) {
          better = m.code_size(v) > m.code_size(w) ||
                   (m.code_size(v) == m.code_size(w) && m.version_id(v) > m.version_id(w));
        } else {
          better = decrease < pick_decrease;
        }
      }
      if (better) {
        pick = i;
        pick_decrease = decrease;
      }
    }

    bool remove = false;
    if (c.mode == Priority::kPerformance) {
      remove = pick_decrease < c.min_gain;
    } else {
      std::vector<std::size_t> rest = members;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(*pick));
      remove = max_loss(oracle, best_speedups(m, rest)) <= c.loss_tolerance;
    }
    if (!remove) break;
    if (removed) removed->push_back(m.version_id(members[*pick]));
    members.erase(members.begin() + static_cast<std::ptrdiff_t>(*pick));
  }
  return ids_of(m, members);
}

ExhaustiveResult exhaustive_select(const SpeedupMatrix& m, std::size_t k, Aggregate agg) {
  const auto candidates = m.candidate_indices();
  const auto n = candidates.size();
  if (n > kExhaustiveCandidateLimit) {
    throw Error(ErrorKind::kInstanceTooLarge,
                std::to_string(n) + " candidates exceed the limit of " +
                    std::to_string(kExhaustiveCandidateLimit));
  }
  if (k < 1) throw Error(ErrorKind::kInvalidConfig, "k must be >= 1");
  k = std::min(k, n);

  const auto nd = m.num_datasets();
  std::vector<double> values(n * nd);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < nd; ++d) values[i * nd + d] = cell_value(m, candidates[i], d, agg);
  }

  std::uint32_t best_mask = 0;
  double best_f = 0.0;
  std::uint64_t best_size = 0;
  const std::uint32_t limit = n == 32 ? 0xffffffffu : ((1u << n) - 1u);
  for (std::uint32_t mask = 1; mask != 0 && mask <= limit; ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > k) continue;
    double f = 0.0;
    std::uint64_t size = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) size += m.code_size(candidates[i]);
    }
    for (std::size_t d = 0; d < nd; ++d) {
      double best = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) best = std::max(best, values[i * nd + d]);
      }
      f += best;
    }
    bool better = false;
    if (!nearly_equal(f, best_f)) {
      better = f > best_f;
    } else if (size != best_size) {
      better = size < best_size;
    } else {
      better = lex_less(mask, best_mask);
    }
    if (better) {
      best_mask = mask;
      best_f = f;
      best_size = size;
    }
  }

  ExhaustiveResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask & (1u << i)) result.subset.push_back(m.version_id(candidates[i]));
  }
  result.objective = best_f;
  return result;
}

SetMetrics evaluate_set(const SpeedupMatrix& m, std::span<const VersionId> subset) {
  const auto members = resolve(m, subset);
  const auto oracle = oracle_speedups(m);
  const auto best = best_speedups(m, members);
  SetMetrics metrics;
  const auto nd = m.num_datasets();
  metrics.per_dataset_loss.resize(nd);
  const double f = objective_of(m, members, Aggregate::kLogSum);
  double f_star = 0.0;
  for (std::size_t d = 0; d < nd; ++d) {
    metrics.per_dataset_loss[d] = oracle[d] / best[d] - 1.0;
    if (metrics.per_dataset_loss[d] <= kCoverTolerance) ++metrics.covered_count;
    f_star += std::log(oracle[d]);
  }
  metrics.geomean_speedup = std::exp(f / static_cast<double>(nd));
  metrics.oracle_geomean = std::exp(f_star / static_cast<double>(nd));
  return metrics;
}

Report make_selection_report(const SpeedupMatrix& m, const RepresentativeSet& set,
                             const Constraints& c, std::uint64_t baseline_binary_size) {
  const auto metrics = evaluate_set(m, set.selected);
  Report report("selection");

  auto& summary = report.keyvalues("summary");
  std::vector<std::int64_t> selected(set.selected.begin(), set.selected.end());
  std::vector<std::int64_t> pruned(set.pruned.begin(), set.pruned.end());
  Report::put(summary, "selected", selected);
  Report::put(summary, "representatives", static_cast<std::int64_t>(set.selected.size()));
  Report::put(summary, "representatives_with_baseline",
              static_cast<std::int64_t>(set.selected.size() + 1));
  Report::put(summary, "baseline", static_cast<std::int64_t>(m.baseline_id()));
  Report::put(summary, "candidates", static_cast<std::int64_t>(m.num_versions() - 1));
  Report::put(summary, "datasets", static_cast<std::int64_t>(m.num_datasets()));
  Report::put(summary, "objective", set.objective_value);
  Report::put(summary, "geomean_speedup", set.geomean_speedup);
  Report::put(summary, "oracle_geomean", metrics.oracle_geomean);
  Report::put(summary, "max_dataset_loss", set.max_dataset_loss);
  Report::put(summary, "covered_count", static_cast<std::int64_t>(metrics.covered_count));
  Report::put(summary, "size_bytes", static_cast<std::int64_t>(set.size_bytes));
  Report::put(summary, "baseline_binary_size", static_cast<std::int64_t>(baseline_binary_size));
  Report::put(summary, "size_fraction", set.size_fraction);
  Report::put(summary, "budget_used", set.size_used);
  Report::put(summary, "loss_target_met", std::string(set.loss_target_met ? "true" : "false"));
  Report::put(summary, "pruned", pruned);

  auto& cfg = report.keyvalues("constraints");
  Report::put(cfg, "mode", std::string(to_string(c.mode)));
  Report::put(cfg, "aggregate", std::string(to_string(c.aggregate)));
  Report::put(cfg, "max_versions", static_cast<std::int64_t>(c.max_versions));
  Report::put(cfg, "size_budget", c.size_budget);
  Report::put(cfg, "loss_tolerance", c.loss_tolerance);
  Report::put(cfg, "min_gain", c.min_gain);

  auto& trace = report.table("trace", {"step", "version", "delta_f", "objective"});
  for (std::size_t i = 0; i < set.trace.size(); ++i) {
    trace.rows.push_back({static_cast<std::int64_t>(i + 1),
                          static_cast<std::int64_t>(set.trace[i].version), set.trace[i].delta,
                          set.trace[i].objective});
  }

  const auto members = resolve(m, set.selected);
  auto& losses = report.table("datasets", {"dataset_id", "best_kept_version", "kept_speedup",
                                           "oracle_speedup", "loss"});
  for (std::size_t d = 0; d < m.num_datasets(); ++d) {
    std::size_t best_v = m.baseline_index();
    for (const auto v : members) {
      if (m.speedup(v, d) > m.speedup(best_v, d)) best_v = v;
    }
    const double kept = m.speedup(best_v, d);
    losses.rows.push_back({static_cast<std::int64_t>(m.dataset_ids()[d]),
                           static_cast<std::int64_t>(m.version_id(best_v)), kept,
                           kept * (1.0 + metrics.per_dataset_loss[d]),
                           metrics.per_dataset_loss[d]});
  }
  return report;
}

std::vector<VersionId> read_selected(const Report& report) {
  const auto text = report.get("summary", "selected");
  if (!text) throw Error(ErrorKind::kParse, "selection report has no 'selected' entry");
  std::vector<VersionId> ids;
  std::istringstream in(*text);
  std::string token;
  while (in >> token) {
    ids.push_back(static_cast<VersionId>(parse_unsigned(token, "selection report", 0)));
  }
  return ids;
}

std::string_view to_string(Priority p) {
  return p == Priority::kPerformance ? "perf_priority" : "size_priority";
}

std::string_view to_string(Aggregate a) {
  return a == Aggregate::kLogSum ? "log_sum" : "arithmetic";
}

}  // namespace mvsel
