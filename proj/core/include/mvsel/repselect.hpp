#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "mvsel/report.hpp"
#include "mvsel/speedup.hpp"

namespace mvsel {

// Representative-set selection.
//
// The objective over a candidate subset S is
//
//   f(S) = sum over datasets d of  max_{v in S + baseline} ln s(v,d)
//
// The baseline contributes ln 1 = 0, so f(empty) = 0 and f is non-negative,
// monotone and submodular. G(S) = exp(f(S) / |D|) is the geometric-mean
// speedup obtained by always running the best version kept in S.
//
// The greedy loop, tie-break orders and prune pass below are this library's
// concrete choice for "greedy pruning under a performance/size priority".

enum class Priority { kPerformance, kSize };

enum class Aggregate {
  kLogSum,      // default; geometric mean speedup
  kArithmetic,  // sum of (best speedup - 1); no approximation bound claimed
};

struct Constraints {
  std::size_t max_versions = 1;                                  // K, non-baseline picks
  double size_budget = std::numeric_limits<double>::infinity();  // B, fraction of baseline size
  double loss_tolerance = 0.0;                                   // L, per-dataset relative loss
  double min_gain = 1e-9;                                        // epsilon
  Priority mode = Priority::kPerformance;
  Aggregate aggregate = Aggregate::kLogSum;
};

// Throws Error(kInvalidConfig) unless K >= 1 and B, L, epsilon >= 0.
void validate(const Constraints& constraints);

struct SelectionStep {
  VersionId version = 0;
  double delta = 0.0;      // gain in f from this pick
  double objective = 0.0;  // f after this pick
};

struct RepresentativeSet {
  std::vector<VersionId> selected;  // pick order, pruned members removed
  std::vector<SelectionStep> trace; // every greedy pick, before pruning
  std::vector<VersionId> pruned;    // removal order
  double objective_value = 0.0;
  double geomean_speedup = 1.0;
  double max_dataset_loss = 0.0;
  std::uint64_t size_bytes = 0;
  double size_fraction = 0.0;  // size_bytes / baseline binary size
  double size_used = 0.0;      // fraction of the budget; 0 when unbounded
  bool loss_target_met = false;
};

struct SetMetrics {
  double geomean_speedup = 1.0;         // G(S)
  std::vector<double> per_dataset_loss; // s*(d) / s_S(d) - 1
  std::size_t covered_count = 0;        // datasets at full-oracle speedup (1e-9)
  double oracle_geomean = 1.0;          // G*

  double max_loss() const;
};

// f(S). Baseline and unknown ids are rejected with kUnknownVersion.
double objective(const SpeedupMatrix& matrix, std::span<const VersionId> subset,
                 Aggregate aggregate = Aggregate::kLogSum);

RepresentativeSet greedy_select(const SpeedupMatrix& matrix, std::uint64_t baseline_binary_size,
                                const Constraints& constraints);

// Greedy picks only, no prune pass. Exposed so the approximation bound can be
// checked directly against exhaustive_select.
RepresentativeSet greedy_picks(const SpeedupMatrix& matrix, std::uint64_t baseline_binary_size,
                               const Constraints& constraints);

std::vector<VersionId> prune_redundant(const SpeedupMatrix& matrix,
                                       std::span<const VersionId> selected,
                                       const Constraints& constraints,
                                       std::vector<VersionId>* removed = nullptr);

struct ExhaustiveResult {
  std::vector<VersionId> subset;  // ascending ids
  double objective = 0.0;
};

inline constexpr std::size_t kExhaustiveCandidateLimit = 20;

// Best subset of at most k candidates by brute force. Ties: smaller total
// code size, then lexicographically smaller id list.
ExhaustiveResult exhaustive_select(const SpeedupMatrix& matrix, std::size_t k,
                                   Aggregate aggregate = Aggregate::kLogSum);

SetMetrics evaluate_set(const SpeedupMatrix& matrix, std::span<const VersionId> subset);

Report make_selection_report(const SpeedupMatrix& matrix, const RepresentativeSet& set,
                             const Constraints& constraints, std::uint64_t baseline_binary_size);

// Reads the `selected` list back from a rendered selection report.
std::vector<VersionId> read_selected(const Report& report);

std::string_view to_string(Priority priority);
std::string_view to_string(Aggregate aggregate);

}  // namespace mvsel
