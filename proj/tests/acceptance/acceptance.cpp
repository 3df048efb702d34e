// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "mvsel/cross_validation.hpp"
#include "mvsel/dispatch.hpp"
#include "mvsel/metrics.hpp"
#include "mvsel/render.hpp"
#include "mvsel/repselect.hpp"
#include "mvsel/samples.hpp"
#include "mvsel/simulate.hpp"
#include "mvsel/synthgen.hpp"
#include "rendered_interpreter.hpp"
#ifdef MVSEL_HAVE_CLI
#include "mvsel_cli/cli.hpp"
#endif

using namespace mvsel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && outcome_.pass) {
      outcome_.pass = false;
      outcome_.detail = what;
    }
  }
  Outcome done(std::string summary) {
    if (outcome_.pass) outcome_.detail = std::move(summary);
    return outcome_;
  }

 private:
  Outcome outcome_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Constraints perf(std::size_t k, double eps) {
  Constraints c;
  c.max_versions = k;
  c.min_gain = eps;
  return c;
}

Outcome greedy_vs_oracle() {
  Check check;
  const auto start = std::chrono::steady_clock::now();
  const double bound = 1.0 - 1.0 / std::numbers::e;
  Rng rng(20090101);
  double worst_ratio = 1.0;
  const int instances = 250;
  for (int i = 0; i < instances; ++i) {
    const auto candidates = 1 + rng.below(9);  // <= 10 versions with the baseline
    const auto datasets = 1 + rng.below(30);
    const auto m = testing::random_matrix(rng, candidates, datasets);
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto greedy = greedy_picks(m, 1000, perf(k, 0.0));
      const auto best = exhaustive_select(m, k);
      const double fg = objective(m, greedy.selected);
      check.require(fg >= bound * best.objective,
                    "instance " + std::to_string(i) + " k=" + std::to_string(k) + " below bound");
      if (best.objective > 0) worst_ratio = std::min(worst_ratio, fg / best.objective);
      if (k == 1) {
        check.require(fg == objective(m, best.subset),
                      "instance " + std::to_string(i) + ": greedy k=1 differs from oracle");
      }
    }
  }
  const double t = seconds_since(start);
  check.require(t < 10.0, "runtime " + fmt(t) + " s exceeds 10 s");
  return check.done(std::to_string(instances) + " instances, worst greedy/oracle " +
                    fmt(worst_ratio) + " >= " + fmt(bound) + ", " + fmt(t) + " s");
}

Outcome toy_regression() {
  Check check;
  const auto m = testing::toy_matrix();
  const auto set = greedy_select(m, 1000, perf(3, 1e-9));
  check.require(set.trace.size() >= 2 && set.trace[0].version == 3 && set.trace[1].version == 1,
                "greedy trace does not start (v3, v1)");
  check.require(set.pruned == std::vector<VersionId>{3}, "prune did not remove exactly v3");
  auto final_set = set.selected;
  std::sort(final_set.begin(), final_set.end());
  check.require(final_set == std::vector<VersionId>{1, 2}, "final set is not {v1, v2}");
  const double f = objective(m, set.selected);
  check.require(std::abs(f - std::log(4.0)) <= 1e-9, "f = " + fmt(f) + " is not ln 4");
  std::string trace;
  for (const auto& s : set.trace) trace += (trace.empty() ? "v" : ", v") + std::to_string(s.version);
  return check.done("trace (" + trace + "), pruned v3, final {v1, v2}, f = " +
                    fmt(f));
}

struct PlantedRun {
  Scenario train;
  Scenario test;
  std::vector<VersionId> rep;
  TreeModel tree;
  RuleListModel rules;
  SimulationReport sim;
  double cv_error = 0.0;
};

SynthConfig planted_config(double noise) {
  SynthConfig c;
  c.n_versions = 5;  // baseline + 4 candidate versions
  c.n_regions = 4;
  c.feature_arity = 2;
  c.n_datasets = 400;
  c.feature_levels = 20;
  c.noise_sigma = noise;
  c.seed = 11;
  c.structure_seed = 11;
  return c;
}

PlantedRun planted_run(double noise) {
  auto c = planted_config(noise);
  auto train = generate(c).first;
  c.seed = 12;  // fresh draws over the same regions
  c.first_dataset_id = 1000000;
  auto test = generate(c).first;
  const auto m = speedups(train);
  auto rep = greedy_select(m, train.baseline().code_size, perf(4, 1e-9)).selected;
  const auto samples = make_dc_labels(m, train.feature_rows(), rep);
  LearnerSpec learner;
  const auto cv = cross_validate(learner, samples, 10, 5);
  auto tree = train_tree_classifier(samples);
  auto rules = train_rule_list(samples);
  SimulationOptions opt;
  for (const auto& d : train.datasets()) opt.train_dataset_ids.push_back(d.id);
  opt.baseline_binary_size = train.baseline().code_size;
  auto sim = simulate(test, compile_dispatcher(tree), rep, opt);
  return {std::move(train), std::move(test), std::move(rep), std::move(tree), std::move(rules),
          std::move(sim), cv.aggregate};
}

Outcome end_to_end(const PlantedRun& clean, const PlantedRun& noisy, double elapsed) {
  Check check;
  check.require(clean.sim.fraction_of_representative_oracle == 1.0,
                "noise 0: fraction " + fmt(clean.sim.fraction_of_representative_oracle));
  check.require(clean.cv_error == 0.0, "noise 0: CV error " + fmt(clean.cv_error));
  check.require(noisy.sim.fraction_of_representative_oracle >= 0.95,
                "noise 0.05: fraction " + fmt(noisy.sim.fraction_of_representative_oracle));
  check.require(clean.sim.train_overlap.empty() && noisy.sim.train_overlap.empty(),
                "test datasets overlap training");
  check.require(elapsed < 30.0, "runtime " + fmt(elapsed) + " s exceeds 30 s");
  return check.done("noise 0: fraction " + fmt(clean.sim.fraction_of_representative_oracle) +
                    ", CV error " + fmt(100 * clean.cv_error) + "%; noise 0.05 held-out: fraction " +
                    fmt(noisy.sim.fraction_of_representative_oracle) + ", " + fmt(elapsed) + " s");
}

Outcome metric_identities() {
  Check check;
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> actual(2 + rng.below(100));
    for (auto& a : actual) a = rng.normal() * 5.0;
    const double mean = rng.uniform(-3, 3);
    const double r = rrse(std::vector<double>(actual.size(), mean), actual, mean);
    check.require(std::abs(r - 100.0) <= 1e-9, "rrse(mean) = " + fmt(r));
    check.require(rrse(actual, actual, mean) == 0.0, "rrse(perfect) != 0");
  }
  const std::vector<VersionId> actual = {1, 2, 3, 4, 5, 6, 7, 8};
  auto predicted = actual;
  check.require(error_rate(predicted, actual) == 0.0, "error_rate all correct");
  predicted[0] = predicted[7] = 0;
  check.require(error_rate(predicted, actual) == 0.25, "error_rate 2 of 8");
  std::fill(predicted.begin(), predicted.end(), 99u);
  check.require(error_rate(predicted, actual) == 1.0, "error_rate all wrong");
  return check.done("rrse(mean) = 100 +- 1e-9 on 500 draws, rrse(perfect) = 0, error rates 0 / 0.25 / 1");
}

Outcome dispatcher_equivalence(const PlantedRun& noisy) {
  Check check;
  Rng rng(777);
  std::size_t disagreements = 0;
  std::size_t vectors = 0;
  for (const bool use_rules : {false, true}) {
    const auto spec = use_rules ? compile_dispatcher(noisy.rules) : compile_dispatcher(noisy.tree);
    const auto round_trip = deserialize(serialize(spec));
    const auto program = testing::RenderedProgram::parse(render_template(spec, default_template()));
    for (int i = 0; i < 10000; ++i) {
      std::vector<double> x(2);
      for (auto& v : x) {
        // Half the draws land on the feature lattice, where thresholds bite.
        v = rng.below(2) ? static_cast<double>(rng.below(21)) * 50.0 : rng.uniform(-10, 1010);
      }
      const VersionId model = use_rules ? predict_rules(noisy.rules, x).label : predict_tree(noisy.tree, x).label;
      disagreements += eval_dispatcher(spec, x).version != model;
      disagreements += eval_dispatcher(round_trip, x).version != model;
      disagreements += program.run(x) != model;
      ++vectors;
    }
  }
  check.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
  return check.done(std::to_string(vectors) + " vectors (tree and rule list), 0 disagreements");
}

Outcome overhead_proxy(const std::vector<const PlantedRun*>& runs) {
  Check check;
  std::string summary;
  for (const auto* run : runs) {
    for (const bool use_rules : {false, true}) {
      const auto spec = use_rules ? compile_dispatcher(run->rules) : compile_dispatcher(run->tree);
      const auto sim = simulate(run->test, spec, run->rep);
      const double limit =
          std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(spec.leaf_count(), 1)))) + 3.0;
      const std::string name = use_rules ? "rules" : "tree";
      check.require(sim.mean_comparisons <= limit,
                    name + ": mean comparisons " + fmt(sim.mean_comparisons) + " > " + fmt(limit));
      check.require(spec.byte_size() < 10 * 1024, name + ": " + std::to_string(spec.byte_size()) + " bytes");
      summary += (summary.empty() ? "" : "; ") + name + " " + fmt(sim.mean_comparisons) + " <= " +
                 fmt(limit) + " cmp, " + std::to_string(spec.byte_size()) + " B";
    }
  }
  return check.done(summary);
}

#ifdef MVSEL_HAVE_CLI
int cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  return code;
}

Outcome determinism() {
  Check check;
  const auto root = testing::scratch_dir("acceptance_determinism");
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    const auto dir = root / ("run" + std::to_string(pass));
    const auto p = [&](const char* name) { return (dir / name).string(); };
    std::vector<std::vector<std::string>> steps = {
        {"gen", "--versions", "5", "--regions", "4", "--datasets", "150", "--features", "2",
         "--noise", "0.05", "--seed", "9", "--out", p("train")},
        {"gen", "--versions", "5", "--regions", "4", "--datasets", "150", "--features", "2",
         "--noise", "0.05", "--seed", "10", "--structure-seed", "9", "--first-id", "900",
         "--out", p("test")},
        {"select", "--format", "stable", "--scenario", p("train"), "-K", "4", "-o", p("select.txt")},
        {"train", "--scenario", p("train"), "--selection", p("select.txt"), "--learner", "tree",
         "--set", "prune=true", "--seed", "3", "-o", p("tree.model")},
        {"train", "--scenario", p("train"), "--selection", p("select.txt"), "--learner", "regtree",
         "-o", p("ppm.model")},
        {"cv", "--format", "stable", "--scenario", p("train"), "--selection", p("select.txt"),
         "--learner", "rules", "--seed", "3", "-o", p("cv_rules.txt")},
        {"cv", "--format", "stable", "--scenario", p("train"), "--selection", p("select.txt"),
         "--learner", "linreg", "--seed", "3", "-o", p("cv_linreg.txt")},
        {"emit", "--model", p("tree.model"), "-o", p("tree.dispatch"), "--template", "builtin"},
        {"simulate", "--format", "stable", "--scenario", p("test"), "--selection", p("select.txt"),
         "--dispatcher", p("tree.dispatch"), "--train-scenario", p("train"), "-o", p("sim.txt")},
        {"simulate", "--format", "stable", "--scenario", p("test"), "--selection", p("select.txt"),
         "--model", p("ppm.model"), "-o", p("sim_ppm.txt")},
    };
    for (const auto& step : steps) {
      check.require(cli(step) == 0, step[0] + " failed");
    }
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), dir).string();
      const auto bytes = testing::slurp(entry.path());
      if (pass == 0) {
        first[rel] = bytes;
      } else {
        check.require(first.contains(rel) && first[rel] == bytes, rel + " differs between runs");
      }
    }
  }
  return check.done("gen, select, train, cv, emit, simulate: " + std::to_string(first.size()) +
                    " output files byte-identical across two runs");
}
#endif

Outcome cv_protocol() {
  Check check;
  Rng rng(88);
  std::size_t configs = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 2 + rng.below(12);
    const std::size_t n = k + rng.below(300);
    std::vector<VersionId> labels(n);
    const auto classes = 1 + rng.below(6);
    for (auto& l : labels) l = static_cast<VersionId>(rng.below(classes));
    for (const bool stratified : {false, true}) {
      const auto fold = stratified ? stratified_folds(labels, k, trial) : plain_folds(n, k, trial);
      check.require(fold.size() == n, "assignment size");
      std::vector<std::size_t> sizes(k, 0);
      std::map<VersionId, std::vector<std::size_t>> per_class;
      for (std::size_t i = 0; i < n; ++i) {
        check.require(fold[i] < k, "fold index out of range");
        ++sizes[fold[i]];  // one fold per sample: each sample is tested exactly once
        auto& c = per_class[labels[i]];
        c.resize(k, 0);
        ++c[fold[i]];
      }
      const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      check.require(*hi - *lo <= 1, "fold sizes differ by more than 1");
      if (stratified) {
        for (const auto& [label, counts] : per_class) {
          const auto [clo, chi] = std::minmax_element(counts.begin(), counts.end());
          check.require(*chi - *clo <= 1, "class " + std::to_string(label) + " unbalanced across folds");
        }
      }
      ++configs;
    }
  }
  // The CV driver itself tests every sample exactly once.
  std::vector<LabeledSample> data;
  for (int i = 0; i < 57; ++i) data.push_back({{static_cast<double>(i)}, static_cast<VersionId>(i % 3)});
  const auto cv = cross_validate(LearnerSpec{}, data, 10, 1);
  std::size_t tested = 0;
  for (const auto& f : cv.folds) tested += f.test_size;
  check.require(tested == data.size(), "cross_validate tested " + std::to_string(tested) + " samples");
  return check.done(std::to_string(configs) +
                    " fold assignments: sizes within 1, each sample once, per-class counts within 1");
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  const auto planted_start = std::chrono::steady_clock::now();
  const auto clean = planted_run(0.0);
  const auto noisy = planted_run(0.05);
  const double planted_seconds = seconds_since(planted_start);

  criteria.emplace_back("greedy within (1-1/e) of the exhaustive oracle", greedy_vs_oracle);
  criteria.emplace_back("toy matrix trace, prune and final set", toy_regression);
  criteria.emplace_back("planted end-to-end fraction of available speedup",
                        [&] { return end_to_end(clean, noisy, planted_seconds); });
  criteria.emplace_back("metric identities", metric_identities);
  criteria.emplace_back("dispatcher equivalence on 10^4 vectors", [&] { return dispatcher_equivalence(noisy); });
  criteria.emplace_back("selection overhead proxy", [&] { return overhead_proxy({&clean, &noisy}); });
#ifdef MVSEL_HAVE_CLI
  criteria.emplace_back("machine-stable determinism of every command", determinism);
#else
  criteria.emplace_back("machine-stable determinism of every command",
                        [] { return Outcome{false, "built without the CLI"}; });
#endif
  criteria.emplace_back("cross-validation fold protocol", cv_protocol);

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": "
              << criteria[i].first << " -- " << outcome.detail << '\n';
  }
  return failures == 0 ? 0 : 1;
}
