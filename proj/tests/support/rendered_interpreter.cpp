#include "rendered_interpreter.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvsel::testing {

struct RenderedProgram::Node {
  bool is_if = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::uint32_t version = 0;
  std::unique_ptr<Node> then_branch;
  std::unique_ptr<Node> else_branch;
};

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) { tokenize(text); }

  std::unique_ptr<RenderedProgram::Node> program(std::size_t& ifs, std::size_t& rets) {
    for (const char* t : {"int", "select_version", "(", "const", "double", "*", "x", ")", "{"}) {
      expect(t);
    }
    auto root = statement(ifs, rets);
    expect("}");
    if (pos_ != tokens_.size()) fail("trailing text");
    return root;
  }

 private:
  std::unique_ptr<RenderedProgram::Node> statement(std::size_t& ifs, std::size_t& rets) {
    auto node = std::make_unique<RenderedProgram::Node>();
    if (peek() == "return") {
      ++pos_;
      node->version = static_cast<std::uint32_t>(std::stoul(next()));
      expect(";");
      ++rets;
      return node;
    }
    expect("if");
    expect("(");
    expect("x");
    expect("[");
    node->feature = std::stoul(next());
    expect("]");
    expect("<=");
    const auto number = next();
    char* end = nullptr;
    node->threshold = std::strtod(number.c_str(), &end);
    if (end != number.c_str() + number.size()) fail("bad number " + number);
    expect(")");
    expect("{");
    node->is_if = true;
    ++ifs;
    node->then_branch = statement(ifs, rets);
    expect("}");
    expect("else");
    expect("{");
    node->else_branch = statement(ifs, rets);
    expect("}");
    return node;
  }

  void tokenize(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
      const char c = s[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
        tokens_.emplace_back(s.substr(i, j - i));
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
        std::size_t j = i + 1;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '.' ||
                                ((s[j] == '-' || s[j] == '+') && (s[j - 1] == 'e' || s[j - 1] == 'E')))) {
          ++j;
        }
        tokens_.emplace_back(s.substr(i, j - i));
        i = j;
      } else if (c == '<' && i + 1 < s.size() && s[i + 1] == '=') {
        tokens_.emplace_back("<=");
        i += 2;
      } else {
        tokens_.emplace_back(1, c);
        ++i;
      }
    }
  }

  std::string_view peek() const { return pos_ < tokens_.size() ? tokens_[pos_] : std::string_view{}; }
  std::string next() {
    if (pos_ >= tokens_.size()) fail("unexpected end");
    return tokens_[pos_++];
  }
  void expect(std::string_view t) {
    if (peek() != t) fail("expected '" + std::string(t) + "', got '" + std::string(peek()) + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("rendered program token " + std::to_string(pos_) + ": " + what);
  }

  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

RenderedProgram RenderedProgram::parse(std::string_view text) {
  RenderedProgram p;
  Parser parser(text);
  p.root_ = parser.program(p.conditionals_, p.returns_);
  return p;
}

std::uint32_t RenderedProgram::run(std::span<const double> x) const {
  const Node* n = root_.get();
  while (n->is_if) n = x[n->feature] <= n->threshold ? n->then_branch.get() : n->else_branch.get();
  return n->version;
}

}  // namespace mvsel::testing
