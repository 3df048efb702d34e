#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "mvsel/ppm.hpp"
#include "mvsel/rules.hpp"
#include "mvsel/tree.hpp"

namespace mvsel {

// A trained model as written by `mvsel train`.
//
//   MVMODEL v1; kind=tree; arity=2; nodes=3; depth=1
//   C <min_split> <max_depth> <prune 0|1> <prune_holdout> <seed>
//   B <feature> <threshold> <left> <right> <majority label>
//   L <label>
//
// kind=regtree uses the same layout with mean targets in place of labels.
// kind=linreg has `I <intercept>` and `W <c0> <c1> ...`.
// kind=rules has one `R <label> <coverage> <correct> <n> (<f> le|gt <t>)*n`
// line per rule after a `D <default label>` line.
// kind=ppm lists `S <version> <code_size>` lines (baseline first), then one
// `V <version>` line followed by an embedded regtree or linreg block per
// representative version. Reals are printed with 17 significant digits.
using ModelFile = std::variant<TreeModel, RuleListModel, PpmModel>;

std::string serialize_model(const ModelFile& model);
ModelFile parse_model(std::string_view text);

}  // namespace mvsel
