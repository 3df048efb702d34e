#include "mvsel/render.hpp"

#include <map>
#include <sstream>
#include <vector>

#include "mvsel/csv.hpp"

namespace mvsel {
namespace {

constexpr std::string_view kDefaultTemplate = R"({{MAIN}}
int select_version(const double* x) {
  {{BODY}}
}
{{BRANCH cond then else}}
if ({{cond}}) {
  {{then}}
} else {
  {{else}}
}
{{FEAT i}}
x[{{i}}]
{{CMP_LE}}
<=
{{VER id}}
return {{id}};
)";

const std::vector<std::string_view> kHeaders = {"{{BRANCH cond then else}}", "{{FEAT i}}",
                                                "{{VER id}}", "{{CMP_LE}}", "{{MAIN}}"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::map<std::string, std::string, std::less<>> split_blocks(std::string_view text) {
  std::map<std::string, std::string, std::less<>> blocks;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string current;
  std::vector<std::string> lines;
  auto flush = [&] {
    if (current.empty()) return;
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    std::string body;
    for (std::size_t i = 0; i < lines.size(); ++i) body += (i ? "\n" : "") + lines[i];
    blocks[current] = body;
    lines.clear();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    bool header = false;
    for (const auto h : kHeaders) {
      if (t == h) {
        flush();
        current = std::string(h);
        header = true;
        break;
      }
    }
    if (!header && !current.empty()) lines.push_back(line);
  }
  flush();
  return blocks;
}

// Replaces every {{name}} in `text`. When the placeholder is preceded only by
// whitespace on its line, continuation lines of `value` get that indent.
std::string substitute(std::string_view text, std::string_view name, std::string_view value) {
  const std::string key = "{{" + std::string(name) + "}}";
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto hit = text.find(key, pos);
    if (hit == std::string_view::npos) {
      out.append(text.substr(pos));
      return out;
    }
    out.append(text.substr(pos, hit - pos));
    const auto line_start = text.rfind('\n', hit == 0 ? 0 : hit - 1);
    const auto from = line_start == std::string_view::npos || hit == 0 ? 0 : line_start + 1;
    const auto prefix = text.substr(from, hit - from);
    const bool indented = prefix.find_first_not_of(" \t") == std::string_view::npos;
    for (const char c : value) {
      out.push_back(c);
      if (c == '\n' && indented) out.append(prefix);
    }
    pos = hit + key.size();
  }
}

void require(const std::map<std::string, std::string, std::less<>>& blocks, std::string_view header,
             std::initializer_list<std::string_view> params) {
  const auto it = blocks.find(header);
  if (it == blocks.end()) throw Error(ErrorKind::kTemplate, std::string(header));
  for (const auto p : params) {
    if (it->second.find("{{" + std::string(p) + "}}") == std::string::npos) {
      throw Error(ErrorKind::kTemplate,
                  "{{" + std::string(p) + "}} inside " + std::string(header));
    }
  }
}

class Renderer {
 public:
  Renderer(const DispatcherSpec& spec, const std::map<std::string, std::string, std::less<>>& b)
      : spec_(spec),
        branch_(b.at("{{BRANCH cond then else}}")),
        feat_(b.at("{{FEAT i}}")),
        ver_(b.at("{{VER id}}")),
        cmp_(trim(b.at("{{CMP_LE}}"))) {}

  std::string node(std::size_t at) const {
    const auto& n = spec_.nodes[at];
    if (!n.is_branch) return substitute(ver_, "id", std::to_string(n.version));
    const auto cond = substitute(feat_, "i", std::to_string(n.feature)) + " " + cmp_ + " " +
                      format_real(n.threshold);
    auto text = substitute(branch_, "cond", cond);
    text = substitute(text, "then", node(n.left));
    return substitute(text, "else", node(n.right));
  }

 private:
  const DispatcherSpec& spec_;
  std::string branch_;
  std::string feat_;
  std::string ver_;
  std::string cmp_;
};

}  // namespace

std::string render_template(const DispatcherSpec& spec, std::string_view template_text) {
  validate_dispatcher(spec);
  const auto blocks = split_blocks(template_text);
  require(blocks, "{{BRANCH cond then else}}", {"cond", "then", "else"});
  require(blocks, "{{FEAT i}}", {"i"});
  require(blocks, "{{VER id}}", {"id"});
  require(blocks, "{{CMP_LE}}", {});

  const auto body = Renderer(spec, blocks).node(spec.entry_index());
  const auto main = blocks.find("{{MAIN}}");
  if (main == blocks.end()) return body + "\n";
  if (main->second.find("{{BODY}}") == std::string::npos) {
    throw Error(ErrorKind::kTemplate, "{{BODY}} inside {{MAIN}}");
  }
  return substitute(main->second, "BODY", body) + "\n";
}

std::string_view default_template() { return kDefaultTemplate; }

}  // namespace mvsel
