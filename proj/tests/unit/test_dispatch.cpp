#include <doctest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "mvsel/dispatch.hpp"
#include "mvsel/render.hpp"
#include "mvsel/repselect.hpp"
#include "mvsel/samples.hpp"
#include "mvsel/simulate.hpp"
#include "mvsel/synthgen.hpp"
#include "rendered_interpreter.hpp"

using namespace mvsel;
using testing::RenderedProgram;

namespace {

TreeModel depth1_tree() {
  const std::vector<LabeledSample> data = {{{1.0}, 1}, {{2.0}, 1}, {{10.0}, 2}, {{11.0}, 2}};
  return train_tree_classifier(data);
}

std::vector<LabeledSample> noisy_2d(Rng& rng, std::size_t n, std::size_t arity) {
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(arity);
    for (auto& v : x) v = rng.uniform(-50, 50);
    VersionId label = x[0] <= 0 ? (x[1] <= 10 ? 1 : 2) : 3;
    if (rng.uniform01() < 0.15) label = static_cast<VersionId>(rng.below(4));
    out.push_back({std::move(x), label});
  }
  return out;
}

std::vector<double> random_point(Rng& rng, std::size_t arity) {
  std::vector<double> x(arity);
  // Draw some points exactly on training values to exercise the <= boundary.
  for (auto& v : x) v = rng.below(4) == 0 ? std::round(rng.uniform(-60, 60)) : rng.uniform(-60, 60);
  return x;
}

const char* kMinimalTemplate =
    "{{BRANCH cond then else}}\n"
    "({{cond}} ? {{then}} : {{else}})\n"
    "{{FEAT i}}\n"
    "f{{i}}\n"
    "{{CMP_LE}}\n"
    "<=\n"
    "{{VER id}}\n"
    "ver{{id}}\n";

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("single-leaf tree compiles to one node") {
  const std::vector<LabeledSample> data = {{{1.0}, 4}, {{2.0}, 4}};
  const auto spec = compile_dispatcher(train_tree_classifier(data));
  REQUIRE(spec.nodes.size() == 1);
  const auto r = eval_dispatcher(spec, std::vector<double>{123.0});
  CHECK(r.version == 4);
  CHECK(r.comparisons == 0);
}

TEST_CASE("depth-1 tree compiles to three nodes") {
  const auto spec = compile_dispatcher(depth1_tree());
  CHECK(spec.nodes.size() == 3);
  CHECK(spec.depth() == 1);
  CHECK(spec.leaf_count() == 2);
  CHECK(eval_dispatcher(spec, std::vector<double>{3.0}).version == 1);
  CHECK(eval_dispatcher(spec, std::vector<double>{6.0}).version == 1);
  CHECK(eval_dispatcher(spec, std::vector<double>{7.0}).version == 2);
  CHECK(eval_dispatcher(spec, std::vector<double>{3.0}).comparisons == 1);
  CHECK_THROWS_AS(eval_dispatcher(spec, std::vector<double>{}), Error);
}

TEST_CASE("golden dispatcher text for the depth-1 tree") {
  const auto golden = testing::slurp(std::filesystem::path(MVSEL_TEST_DATA_DIR) / "depth1.dispatch");
  CHECK(serialize(compile_dispatcher(depth1_tree())) == golden);
  CHECK(serialize(deserialize(golden)) == golden);
}

TEST_CASE("rule list lowering matches the rule list at the boundary") {
  RuleListModel rules;
  rules.arity = 1;
  rules.rules = {{{{0, Direction::kLessEqual, 6.0}}, 1, 0, 0}};
  rules.default_label = 2;
  const auto spec = compile_dispatcher(rules);
  CHECK(spec.model_kind == DispatchModelKind::kRulesLoweredToTree);
  for (double x : {3.0, 6.0, 7.0}) {
    const std::vector<double> v = {x};
    CHECK(eval_dispatcher(spec, v).version == predict_rules(rules, v).label);
  }
}

TEST_CASE("compiled, deserialized and rendered forms agree with the model") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t arity = 2 + rng.below(3);
    const auto data = noisy_2d(rng, 150, arity);
    const auto tree = train_tree_classifier(data);
    const auto rules = train_rule_list(data);
    for (const bool use_rules : {false, true}) {
      const auto spec = use_rules ? compile_dispatcher(rules) : compile_dispatcher(tree);
      validate_dispatcher(spec);
      const auto text = serialize(spec);
      const auto back = deserialize(text);
      CHECK(serialize(back) == text);
      CHECK(spec.byte_size() == text.size());
      const auto program = RenderedProgram::parse(render_template(spec, default_template()));
      std::size_t disagreements = 0;
      for (int i = 0; i < 1000; ++i) {
        const auto x = random_point(rng, arity);
        const VersionId expected = use_rules ? predict_rules(rules, x).label : predict_tree(tree, x).label;
        const auto r = eval_dispatcher(spec, x);
        disagreements += r.version != expected;
        disagreements += eval_dispatcher(back, x).version != expected;
        disagreements += program.run(x) != expected;
        CHECK(r.comparisons <= spec.depth());
        CHECK(spec.depth() <= spec.nodes.size());
      }
      CHECK(disagreements == 0);
    }
  }
}

TEST_CASE("deserialize rejects malformed text with a line number") {
  const std::string good = "MVDISPATCH v1; arity=1; nodes=3\nB 0 6 1 2\nL 1\nL 2\n";
  CHECK_NOTHROW(deserialize(good));
  auto expect_line = [](const std::string& text, const std::string& where) {
    try {
      deserialize(text);
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find(where) != std::string::npos);
    }
  };
  expect_line("MVDISPATCH v1; arity=1; nodes=3\nB 0 6 1 9\nL 1\nL 2\n", "line 2");
  expect_line("MVDISPATCH v1; arity=1; nodes=3\nB 0 6 1 2\nL x\nL 2\n", "line 3");
  expect_line("MVDISPATCH v2; arity=1; nodes=1\nL 1\n", "line 1");
  expect_line("MVDISPATCH v1; arity=1; nodes=2\nL 1\n", "line");
}

TEST_CASE("validate_dispatcher rejects cycles and bad features") {
  DispatcherSpec spec;
  spec.feature_arity = 1;
  spec.nodes.resize(3);
  spec.nodes[0] = {true, 0, 1.0, 1, 2, 0};
  spec.nodes[1] = {true, 0, 2.0, 0, 2, 0};  // back edge to the root
  spec.nodes[2] = {false, 0, 0.0, 0, 0, 5};
  try {
    validate_dispatcher(spec);
    FAIL("expected invalid dispatcher");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidDispatcher);
  }
  CHECK_THROWS_AS(eval_dispatcher(spec, std::vector<double>{0.5}), Error);  // reaches the cycle
  spec.nodes[1] = {true, 3, 2.0, 2, 2, 0};
  CHECK_THROWS_AS(validate_dispatcher(spec), Error);
}

TEST_CASE("leaf versions must be representative or baseline") {
  const auto spec = compile_dispatcher(depth1_tree());
  CHECK_NOTHROW(check_leaf_versions(spec, std::vector<VersionId>{0, 1, 2}));
  CHECK_THROWS_AS(check_leaf_versions(spec, std::vector<VersionId>{0, 1}), Error);
}

TEST_CASE("template rendering") {
  const auto spec = compile_dispatcher(depth1_tree());
  const auto text = render_template(spec, kMinimalTemplate);
  CHECK(count(text, "?") == 1);
  CHECK(count(text, "ver") == 2);
  CHECK(text.find("f0 <= 6") != std::string::npos);

  const std::vector<LabeledSample> one = {{{1.0}, 4}};
  const auto leaf = render_template(compile_dispatcher(train_tree_classifier(one)), kMinimalTemplate);
  CHECK(count(leaf, "?") == 0);
  CHECK(leaf == "ver4\n");

  const auto c_text = render_template(spec, default_template());
  CHECK(c_text ==
        "int select_version(const double* x) {\n"
        "  if (x[0] <= 6) {\n"
        "    return 1;\n"
        "  } else {\n"
        "    return 2;\n"
        "  }\n"
        "}\n");
  const auto program = RenderedProgram::parse(c_text);
  CHECK(program.conditionals() == 1);
  CHECK(program.returns() == 2);

  std::string missing = kMinimalTemplate;
  missing.erase(missing.find("{{CMP_LE}}"), std::string("{{CMP_LE}}\n<=\n").size());
  try {
    render_template(spec, missing);
    FAIL("expected template error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kTemplate);
  }
}

TEST_CASE("code growth") {
  DispatcherSpec empty_spec;
  empty_spec.feature_arity = 1;
  empty_spec.nodes = {{false, 0, 0.0, 0, 0, 0}};
  const std::map<VersionId, std::uint64_t> sizes = {{0, 1000}, {1, 40}, {2, 60}};
  auto g = code_growth({}, sizes, 1000, empty_spec);
  CHECK(g.multiversioning_growth == 0.0);
  CHECK(g.selector_growth == static_cast<double>(empty_spec.byte_size()) / 1000.0);
  g = code_growth(std::vector<VersionId>{1, 2}, sizes, 1000, empty_spec);
  CHECK(g.multiversioning_growth == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(code_growth(std::vector<VersionId>{1}, sizes, 1000, empty_spec).multiversioning_growth <=
        g.multiversioning_growth);
  CHECK_THROWS_AS(code_growth({}, sizes, 0, empty_spec), Error);
}

namespace {

struct Planted {
  Scenario train;
  Scenario test;
  std::vector<VersionId> rep;
  TreeModel tree;
};

Planted planted(double noise) {
  SynthConfig c;
  c.n_versions = 5;
  c.n_regions = 4;
  c.n_datasets = 300;
  c.feature_levels = 20;
  c.noise_sigma = noise;
  c.seed = 1;
  c.structure_seed = 1;
  auto train = generate(c).first;
  c.seed = 2;
  c.first_dataset_id = 100000;
  auto test = generate(c).first;
  Constraints k;
  k.max_versions = 4;
  const auto m = speedups(train);
  auto rep = greedy_select(m, train.baseline().code_size, k).selected;
  auto tree = train_tree_classifier(make_dc_labels(m, train.feature_rows(), rep));
  return {std::move(train), std::move(test), std::move(rep), std::move(tree)};
}

}  // namespace

TEST_CASE("simulation examples") {
  const auto p = planted(0.0);
  const auto oracle = simulate(p.test, OracleSelector{}, p.rep);
  CHECK(oracle.fraction_of_representative_oracle == 1.0);
  CHECK(oracle.mispick_rate == 0.0);

  const auto base = simulate(p.test, FixedSelector{p.test.baseline().id}, p.rep);
  CHECK(base.geomean_realized == 1.0);

  const auto spec = compile_dispatcher(p.tree);
  SimulationOptions opt;
  opt.baseline_binary_size = p.train.baseline().code_size;
  const auto sim = simulate(p.test, spec, p.rep, opt);
  CHECK(sim.mispick_rate == 0.0);
  CHECK(sim.fraction_of_representative_oracle == 1.0);
  CHECK(sim.fraction_of_representative_oracle <= 1.0 + 1e-9);
  REQUIRE(sim.code_growth.has_value());
  CHECK(sim.code_growth->selector_growth > 0.0);
  CHECK(sim.train_overlap.empty());

  // The same dispatcher through a custom selector backed by the in-memory tree.
  CustomSelector custom{"tree", [&](std::span<const double> x) {
                          const auto r = predict_tree(p.tree, x);
                          return DispatchResult{r.label, r.comparisons};
                        }};
  const auto via_model = simulate(p.test, custom, p.rep);
  const auto via_file = simulate(p.test, deserialize(serialize(spec)), p.rep);
  REQUIRE(via_model.rows.size() == via_file.rows.size());
  for (std::size_t i = 0; i < via_model.rows.size(); ++i) {
    CHECK(via_model.rows[i].chosen == via_file.rows[i].chosen);
    CHECK(via_model.rows[i].comparisons == via_file.rows[i].comparisons);
  }
  CHECK(via_model.geomean_realized == via_file.geomean_realized);
}

TEST_CASE("simulation protocol checks") {
  const auto p = planted(0.0);
  SimulationOptions opt;
  for (const auto& d : p.test.datasets()) opt.train_dataset_ids.push_back(d.id);
  const auto sim = simulate(p.test, OracleSelector{}, p.rep, opt);
  CHECK(sim.train_overlap.size() == p.test.num_datasets());
  const auto text = make_simulation_report(sim).render(ReportFormat::kHuman);
  CHECK(text.find("warning = ") != std::string::npos);

  std::vector<VersionId> bogus = p.rep;
  bogus.push_back(77);
  try {
    simulate(p.test, OracleSelector{}, bogus);
    FAIL("expected unknown version");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnknownVersion);
  }
}

TEST_CASE("simulation fractions are invariant to per-dataset runtime scaling") {
  const auto p = planted(0.05);
  auto tables = p.test.to_tables();
  for (auto& c : tables.runtimes) c.seconds *= 1.0 + 0.01 * static_cast<double>(c.dataset % 17);
  const auto scaled = Scenario::from_tables(tables);
  const auto spec = compile_dispatcher(p.tree);
  const auto a = simulate(p.test, spec, p.rep);
  const auto b = simulate(scaled, spec, p.rep);
  CHECK(a.fraction_of_representative_oracle == doctest::Approx(b.fraction_of_representative_oracle).epsilon(1e-12));
  CHECK(a.fraction_of_full_oracle == doctest::Approx(b.fraction_of_full_oracle).epsilon(1e-12));
  CHECK(a.mispick_rate == b.mispick_rate);
  CHECK(a.fraction_of_representative_oracle <= 1.0 + 1e-9);
}
