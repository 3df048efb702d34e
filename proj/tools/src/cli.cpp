#include "mvsel_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "mvsel/cross_validation.hpp"
#include "mvsel/csv.hpp"
#include "mvsel/dispatch.hpp"
#include "mvsel/model_io.hpp"
#include "mvsel/render.hpp"
#include "mvsel/repselect.hpp"
#include "mvsel/samples.hpp"
#include "mvsel/simulate.hpp"
#include "mvsel/speedup.hpp"
#include "mvsel/synthgen.hpp"

namespace mvsel::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream file(p, std::ios::binary);
  if (!file) throw Error(ErrorKind::kIo, "cannot write " + path);
  file << text;
  if (!file) throw Error(ErrorKind::kIo, "write failed for " + path);
}

void require_distinct(std::initializer_list<std::string> paths) {
  std::vector<fs::path> seen;
  for (const auto& p : paths) {
    if (p.empty() || p == "-") continue;
    const auto normal = fs::weakly_canonical(fs::path(p));
    if (std::find(seen.begin(), seen.end(), normal) != seen.end()) {
      throw Error(ErrorKind::kInvalidConfig, "output path used twice: " + p);
    }
    seen.push_back(normal);
  }
}

struct GenOptions {
  SynthConfig config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> structure_seed;
  std::string out_dir = ".";
};

struct SelectOptions {
  std::string scenario;
  std::size_t max_versions = 3;
  double budget = std::numeric_limits<double>::infinity();
  double loss_tolerance = 0.0;
  double min_gain = 1e-9;
  std::string mode = "perf";
  std::string aggregate = "logsum";
  std::optional<std::uint64_t> baseline_size;
  std::string out;
};

struct LearnerOptions {
  std::string learner;
  std::string learner_file;
  std::vector<std::string> settings;
  std::optional<std::uint64_t> seed;
};

struct TrainOptions {
  std::string scenario;
  std::string selection;
  LearnerOptions learner;
  std::string out;
};

struct CvOptions {
  std::string scenario;
  std::string selection;
  LearnerOptions learner;
  std::size_t folds = 10;
  std::string out;
};

struct EmitOptions {
  std::string model;
  std::string out;
  std::string template_path;
  std::string rendered_out;
};

struct SimulateOptions {
  std::string scenario;
  std::string selection;
  std::string dispatcher;
  std::string model;
  bool oracle = false;
  bool baseline_only = false;
  std::string train_scenario;
  std::optional<std::uint64_t> baseline_size;
  std::string out;
};

void add_learner_options(CLI::App* cmd, LearnerOptions& o) {
  cmd->add_option("--learner", o.learner, "tree | rules | regtree | linreg")
      ->check(CLI::IsMember({"tree", "rules", "regtree", "linreg"}));
  cmd->add_option("--learner-file", o.learner_file, "Learner spec file of 'key = value' lines");
  cmd->add_option("--set", o.settings, "Learner option override, key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "Seed for folds and stochastic learner steps");
}

LearnerSpec build_learner(const LearnerOptions& o) {
  LearnerSpec spec;
  bool min_split_set = false;
  if (!o.learner_file.empty()) {
    const auto text = read_file(o.learner_file);
    spec = parse_learner_spec(text);
    min_split_set = text.find("min_split") != std::string::npos;
  }
  if (!o.learner.empty()) set_learner_option(spec, "algorithm", o.learner);
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kInvalidConfig, "--set expects key=value, got '" + kv + "'");
    }
    const auto key = kv.substr(0, eq);
    if (key == "min_split") min_split_set = true;
    set_learner_option(spec, key, kv.substr(eq + 1));
  }
  if (spec.algorithm == Algorithm::kRegTree && !min_split_set) {
    spec.tree.min_split = TreeConfig::regression_defaults().min_split;
  }
  if (o.seed && !spec.seed_set) {
    spec.tree.seed = spec.rules.seed = *o.seed;
    spec.seed_set = true;
  }
  return spec;
}

std::vector<VersionId> load_selection(const std::string& path) {
  return read_selected(Report::parse(read_file(path)));
}

std::uint64_t selection_baseline_size(const std::string& path, const Scenario& fallback) {
  const auto report = Report::parse(read_file(path));
  if (const auto v = report.get("summary", "baseline_binary_size")) {
    return parse_unsigned(*v, path, 0);
  }
  return fallback.baseline().code_size;
}

int cmd_gen(GenOptions& o, std::ostream& out) {
  if (!o.seed) throw Error(ErrorKind::kInvalidConfig, "gen requires --seed");
  o.config.seed = *o.seed;
  o.config.structure_seed = o.structure_seed.value_or(*o.seed);
  const auto [scenario, truth] = generate(o.config);
  write_synthetic_dir(scenario, truth, o.out_dir);
  out << "wrote versions.csv datasets.csv runtimes.csv ground_truth.csv to " << o.out_dir << '\n';
  return kExitOk;
}

int cmd_select(const SelectOptions& o, ReportFormat format, std::ostream& out) {
  const auto scenario = load_scenario_dir(o.scenario);
  const auto matrix = SpeedupMatrix::from_scenario(scenario);
  Constraints c;
  c.max_versions = o.max_versions;
  c.size_budget = o.budget;
  c.loss_tolerance = o.loss_tolerance;
  c.min_gain = o.min_gain;
  c.mode = o.mode == "size" ? Priority::kSize : Priority::kPerformance;
  c.aggregate = o.aggregate == "arith" ? Aggregate::kArithmetic : Aggregate::kLogSum;
  const auto baseline_size = o.baseline_size.value_or(scenario.baseline().code_size);
  const auto set = greedy_select(matrix, baseline_size, c);
  emit(o.out, make_selection_report(matrix, set, c, baseline_size).render(format), out);
  return kExitOk;
}

int cmd_train(const TrainOptions& o, std::ostream& out) {
  require_distinct({o.out, o.selection});
  const auto scenario = load_scenario_dir(o.scenario);
  const auto matrix = SpeedupMatrix::from_scenario(scenario);
  const auto rep = load_selection(o.selection);
  const auto learner = build_learner(o.learner);
  if (learner.tree.prune && learner.algorithm == Algorithm::kTree && !learner.seed_set) {
    throw Error(ErrorKind::kInvalidConfig, "pruning draws a random holdout; pass --seed");
  }
  const auto features = scenario.feature_rows();
  ModelFile model;
  switch (learner.algorithm) {
    case Algorithm::kTree:
      model = train_tree_classifier(make_dc_labels(matrix, features, rep), learner.tree);
      break;
    case Algorithm::kRules:
      model = train_rule_list(make_dc_labels(matrix, features, rep), learner.rules);
      break;
    case Algorithm::kRegTree:
      model = train_ppm(matrix, features, rep, RegressorKind::kRegressionTree, learner.tree);
      break;
    case Algorithm::kLinReg:
      model = train_ppm(matrix, features, rep, RegressorKind::kLinear, learner.tree);
      break;
  }
  emit(o.out, serialize_model(model), out);
  return kExitOk;
}

int cmd_cv(const CvOptions& o, ReportFormat format, std::ostream& out) {
  if (!o.learner.seed) throw Error(ErrorKind::kInvalidConfig, "cv shuffles folds; pass --seed");
  const auto scenario = load_scenario_dir(o.scenario);
  const auto matrix = SpeedupMatrix::from_scenario(scenario);
  const auto rep = load_selection(o.selection);
  const auto learner = build_learner(o.learner);
  const auto features = scenario.feature_rows();
  CVReport cv;
  if (is_classifier(learner.algorithm)) {
    const auto samples = make_dc_labels(matrix, features, rep);
    cv = cross_validate(learner, samples, o.folds, *o.learner.seed);
  } else {
    cv = cross_validate_ppm(learner, matrix, features, rep, o.folds, *o.learner.seed);
  }
  emit(o.out, make_cv_report(cv).render(format), out);
  return kExitOk;
}

DispatcherSpec dispatcher_from_model(const ModelFile& model) {
  if (const auto* tree = std::get_if<TreeModel>(&model)) {
    if (tree->kind != TreeKind::kClassifier) {
      throw Error(ErrorKind::kInvalidConfig, "a regression tree is not a dispatcher");
    }
    return compile_dispatcher(*tree);
  }
  if (const auto* rules = std::get_if<RuleListModel>(&model)) return compile_dispatcher(*rules);
  throw Error(ErrorKind::kInvalidConfig,
              "PPM models select by prediction at run time and have no dispatcher form");
}

int cmd_emit(const EmitOptions& o, std::ostream& out) {
  require_distinct({o.model, o.out, o.rendered_out});
  const auto spec = dispatcher_from_model(parse_model(read_file(o.model)));
  emit(o.out, serialize(spec), out);
  if (!o.template_path.empty()) {
    const auto text = o.template_path == "builtin" ? std::string(default_template())
                                                   : read_file(o.template_path);
    auto target = o.rendered_out;
    if (target.empty() && !o.out.empty() && o.out != "-") target = o.out + ".rendered";
    emit(target, render_template(spec, text), out);
  }
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& o, ReportFormat format, std::ostream& out) {
  const int sources = int(!o.dispatcher.empty()) + int(!o.model.empty()) + int(o.oracle) +
                      int(o.baseline_only);
  if (sources != 1) {
    throw Error(ErrorKind::kInvalidConfig,
                "choose exactly one of --dispatcher, --model, --oracle, --baseline-only");
  }
  const auto test = load_scenario_dir(o.scenario);
  const auto rep = load_selection(o.selection);
  Selector selector = OracleSelector{};
  if (!o.dispatcher.empty()) {
    selector = deserialize(read_file(o.dispatcher));
  } else if (!o.model.empty()) {
    auto model = parse_model(read_file(o.model));
    if (auto* ppm = std::get_if<PpmModel>(&model)) {
      selector = std::move(*ppm);
    } else {
      selector = dispatcher_from_model(model);
    }
  } else if (o.baseline_only) {
    selector = FixedSelector{test.baseline().id};
  }
  SimulationOptions options;
  options.baseline_binary_size = o.baseline_size.value_or(selection_baseline_size(o.selection, test));
  if (!o.train_scenario.empty()) {
    for (const auto& d : load_scenario_dir(o.train_scenario).datasets()) {
      options.train_dataset_ids.push_back(d.id);
    }
  }
  const auto sim = simulate(test, selector, rep, options);
  emit(o.out, make_simulation_report(sim).render(format), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Select representative code versions and build run-time dispatchers", "mvsel"};
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();
  std::string format_name = "human";
  app.add_option("--format", format_name, "Report format: human | stable (machine-stable)")
      ->check(CLI::IsMember({"human", "stable", "machine", "machine-stable"}));

  GenOptions gen_o;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic scenario with planted structure");
  gen->add_option("--versions", gen_o.config.n_versions, "Version count including the baseline");
  gen->add_option("--datasets", gen_o.config.n_datasets, "Dataset count");
  gen->add_option("--features", gen_o.config.feature_arity, "Feature count per dataset");
  gen->add_option("--regions", gen_o.config.n_regions, "Planted regions (0: versions - 1)");
  gen->add_option("--noise", gen_o.config.noise_sigma, "Log-normal runtime noise sigma");
  gen->add_option("--winner-lo", gen_o.config.winner_speedup.lo);
  gen->add_option("--winner-hi", gen_o.config.winner_speedup.hi);
  gen->add_option("--loser-lo", gen_o.config.loser_speedup.lo);
  gen->add_option("--loser-hi", gen_o.config.loser_speedup.hi);
  gen->add_option("--base-lo", gen_o.config.base_runtime.lo, "Baseline runtime range, seconds");
  gen->add_option("--base-hi", gen_o.config.base_runtime.hi);
  gen->add_option("--size-lo", gen_o.config.code_size.lo, "Code size range, bytes");
  gen->add_option("--size-hi", gen_o.config.code_size.hi);
  gen->add_option("--levels", gen_o.config.feature_levels, "Feature lattice levels (0: continuous)");
  gen->add_option("--first-id", gen_o.config.first_dataset_id, "First dataset id");
  gen->add_option("--seed", gen_o.seed, "Seed for dataset draws")->required();
  gen->add_option("--structure-seed", gen_o.structure_seed,
                  "Seed for regions, winners and code sizes (default: --seed)");
  gen->add_option("--out", gen_o.out_dir, "Output directory");

  SelectOptions sel_o;
  auto* sel = app.add_subcommand("select", "Choose a representative version set");
  sel->add_option("--scenario", sel_o.scenario, "Scenario directory")->required();
  sel->add_option("-K,--max-versions", sel_o.max_versions, "Maximum kept versions");
  sel->add_option("--budget", sel_o.budget, "Code size budget as a fraction of the baseline binary");
  sel->add_option("--loss-tol", sel_o.loss_tolerance, "Allowed per-dataset speedup loss");
  sel->add_option("--min-gain", sel_o.min_gain, "Minimum objective gain per pick");
  sel->add_option("--mode", sel_o.mode, "perf | size")->check(CLI::IsMember({"perf", "size"}));
  sel->add_option("--aggregate", sel_o.aggregate, "logsum | arith")
      ->check(CLI::IsMember({"logsum", "arith"}));
  sel->add_option("--baseline-size", sel_o.baseline_size,
                  "Baseline binary size in bytes (default: baseline code size)");
  sel->add_option("-o,--out", sel_o.out, "Report file (default: stdout)");

  TrainOptions train_o;
  auto* train = app.add_subcommand("train", "Train a DC classifier or PPM regressors");
  train->add_option("--scenario", train_o.scenario, "Training scenario directory")->required();
  train->add_option("--selection", train_o.selection, "Selection report")->required();
  add_learner_options(train, train_o.learner);
  train->add_option("-o,--out", train_o.out, "Model file (default: stdout)");

  CvOptions cv_o;
  auto* cv = app.add_subcommand("cv", "Cross-validate a learner");
  cv->add_option("--scenario", cv_o.scenario, "Scenario directory")->required();
  cv->add_option("--selection", cv_o.selection, "Selection report")->required();
  add_learner_options(cv, cv_o.learner);
  cv->add_option("-k,--folds", cv_o.folds, "Fold count");
  cv->add_option("-o,--out", cv_o.out, "Report file (default: stdout)");

  EmitOptions emit_o;
  auto* emit_cmd = app.add_subcommand("emit", "Compile a DC model into a dispatcher");
  emit_cmd->add_option("--model", emit_o.model, "Model file")->required();
  emit_cmd->add_option("-o,--out", emit_o.out, "Dispatcher file (default: stdout)");
  emit_cmd->add_option("--template", emit_o.template_path,
                       "Template file to render, or 'builtin' for the C template");
  emit_cmd->add_option("--rendered-out", emit_o.rendered_out,
                       "Rendered output (default: <out>.rendered)");

  SimulateOptions sim_o;
  auto* sim = app.add_subcommand("simulate", "Run the adaptive binary over a test scenario");
  sim->add_option("--scenario", sim_o.scenario, "Test scenario directory")->required();
  sim->add_option("--selection", sim_o.selection, "Selection report")->required();
  sim->add_option("--dispatcher", sim_o.dispatcher, "Dispatcher file");
  sim->add_option("--model", sim_o.model, "Model file (DC or PPM)");
  sim->add_flag("--oracle", sim_o.oracle, "Perfect selection over the representative set");
  sim->add_flag("--baseline-only", sim_o.baseline_only, "Always run the baseline");
  sim->add_option("--train-scenario", sim_o.train_scenario,
                  "Training scenario, for the train/test overlap check");
  sim->add_option("--baseline-size", sim_o.baseline_size,
                  "Baseline binary size (default: from the selection report)");
  sim->add_option("-o,--out", sim_o.out, "Report file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "mvsel: " << e.what() << '\n';
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitValidation;
  }

  const auto format = parse_report_format(format_name).value_or(ReportFormat::kHuman);
  try {
    if (*gen) return cmd_gen(gen_o, out);
    if (*sel) return cmd_select(sel_o, format, out);
    if (*train) return cmd_train(train_o, out);
    if (*cv) return cmd_cv(cv_o, format, out);
    if (*emit_cmd) return cmd_emit(emit_o, out);
    if (*sim) return cmd_simulate(sim_o, format, out);
  } catch (const Error& e) {
    err << "mvsel: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "mvsel: io error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "mvsel: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace mvsel::cli
