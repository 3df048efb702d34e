#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mvsel/rules.hpp"
#include "mvsel/tree.hpp"

namespace mvsel {

enum class DispatchModelKind { kTree, kRulesLoweredToTree };

struct DispatchNode {
  bool is_branch = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;   // taken when x[feature] <= threshold
  std::size_t right = 0;
  VersionId version = 0;  // leaves only
};

// Compiled run-time selector: a tree of feature comparisons ending in
// version ids. The entry node is always node 0.
struct DispatcherSpec {
  std::size_t feature_arity = 0;
  std::vector<DispatchNode> nodes;
  DispatchModelKind model_kind = DispatchModelKind::kTree;

  std::size_t entry_index() const { return 0; }
  // Length in bytes of the canonical text serialization.
  std::size_t byte_size() const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
  std::vector<VersionId> leaf_versions() const;  // sorted, unique
};

// Upper bound on nodes produced when lowering rule lists.
inline constexpr std::size_t kMaxDispatchNodes = 1u << 20;

DispatcherSpec compile_dispatcher(const TreeModel& model);
DispatcherSpec compile_dispatcher(const RuleListModel& model);

// Throws kInvalidDispatcher for out-of-range indices, cycles, shared nodes or
// feature indices >= arity.
void validate_dispatcher(const DispatcherSpec& spec);

// Every leaf version must be in `allowed` (representative set + baseline).
void check_leaf_versions(const DispatcherSpec& spec, std::span<const VersionId> allowed);

struct DispatchResult {
  VersionId version = 0;
  std::size_t comparisons = 0;
};

DispatchResult eval_dispatcher(const DispatcherSpec& spec, std::span<const double> x);

// Canonical text form:
//   MVDISPATCH v1; arity=<k>; nodes=<n>
//   B <feature> <threshold> <left> <right>
//   L <version_id>
// one node per line, thresholds with 17 significant digits, LF line ends.
std::string serialize(const DispatcherSpec& spec);
DispatcherSpec deserialize(std::string_view text);

struct CodeGrowth {
  double selector_growth = 0.0;         // dispatcher bytes / baseline size
  double multiversioning_growth = 0.0;  // sum of kept version sizes / baseline size
};

CodeGrowth code_growth(std::span<const VersionId> representative,
                       const std::map<VersionId, std::uint64_t>& code_sizes,
                       std::uint64_t baseline_binary_size, const DispatcherSpec& spec);

}  // namespace mvsel
