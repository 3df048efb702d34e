#pragma once

#include <string>
#include <string_view>

#include "mvsel/dispatch.hpp"

namespace mvsel {

// Source-code rendering of a dispatcher.
//
// A template is a list of fragment blocks. Each block starts with a header
// line naming the placeholder it defines and runs until the next header:
//
//   {{BRANCH cond then else}}   one conditional; uses {{cond}} {{then}} {{else}}
//   {{FEAT i}}                  reference to feature i; uses {{i}}
//   {{VER id}}                  reference to (or call of) a version; uses {{id}}
//   {{CMP_LE}}                  the inclusive less-or-equal operator
//   {{MAIN}}                    optional wrapper; {{BODY}} marks the decision
//
// Text before the first header is ignored. A condition renders as
// FEAT(i) + " " + CMP_LE + " " + threshold, the threshold printed with 17
// significant digits. A multi-line value substituted on an indented line is
// re-indented to that line's leading whitespace.
//
// Worked example (this is default_template()):
//
//   {{MAIN}}
//   int select_version(const double* x) {
//     {{BODY}}
//   }
//   {{BRANCH cond then else}}
//   if ({{cond}}) {
//     {{then}}
//   } else {
//     {{else}}
//   }
//   {{FEAT i}}
//   x[{{i}}]
//   {{CMP_LE}}
//   <=
//   {{VER id}}
//   return {{id}};
//
// A depth-1 dispatcher splitting feature 0 at 6 between versions 1 and 2
// renders as
//
//   int select_version(const double* x) {
//     if (x[0] <= 6) {
//       return 1;
//     } else {
//       return 2;
//     }
//   }
std::string render_template(const DispatcherSpec& spec, std::string_view template_text);

std::string_view default_template();

}  // namespace mvsel
