#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "mvsel/report.hpp"
#include "mvsel_cli/cli.hpp"

namespace fs = std::filesystem;
using mvsel::testing::scratch_dir;
using mvsel::testing::slurp;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = mvsel::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const fs::path& path) { return path.string(); }

// gen -> select -> train -> emit in one scratch directory.
fs::path pipeline(const std::string& name) {
  const auto dir = scratch_dir(name);
  REQUIRE(run({"gen", "--versions", "5", "--regions", "4", "--datasets", "200", "--features", "2",
               "--levels", "20", "--seed", "3", "--out", p(dir / "train")})
              .code == 0);
  REQUIRE(run({"gen", "--versions", "5", "--regions", "4", "--datasets", "200", "--features", "2",
               "--levels", "20", "--seed", "4", "--structure-seed", "3", "--first-id", "5000",
               "--out", p(dir / "test")})
              .code == 0);
  REQUIRE(run({"select", "--scenario", p(dir / "train"), "-K", "4", "--format", "stable", "-o",
               p(dir / "sel.txt")})
              .code == 0);
  REQUIRE(run({"train", "--scenario", p(dir / "train"), "--selection", p(dir / "sel.txt"),
               "--learner", "tree", "-o", p(dir / "tree.model")})
              .code == 0);
  REQUIRE(run({"emit", "--model", p(dir / "tree.model"), "-o", p(dir / "tree.dispatch"),
               "--template", "builtin"})
              .code == 0);
  return dir;
}

}  // namespace

TEST_CASE("gen writes four files and is repeatable") {
  const auto dir = scratch_dir("cli_gen");
  const std::vector<std::string> args = {"gen", "--versions", "4", "--datasets", "100",
                                         "--features", "2", "--seed", "7", "--out", p(dir / "a")};
  CHECK(run(args).code == 0);
  auto again = args;
  again.back() = p(dir / "b");
  CHECK(run(again).code == 0);
  for (const char* f : {"versions.csv", "datasets.csv", "runtimes.csv", "ground_truth.csv"}) {
    CHECK(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("gen without a seed is a usage error") {
  const auto r = run({"gen", "--versions", "4", "--datasets", "100", "--features", "2"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--seed") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("select on the toy scenario and bad constraints") {
  const auto dir = scratch_dir("cli_toy");
  std::ofstream(dir / "versions.csv") << "id,name,code_size,is_baseline\n0,o3,1000,1\n1,v1,100,0\n2,v2,200,0\n3,v3,300,0\n";
  std::ofstream(dir / "datasets.csv") << "id,f0\n1,1\n2,2\n3,3\n";
  std::ofstream(dir / "runtimes.csv") << "dataset_id,version_id,runtime_seconds\n"
                                         "1,0,1\n1,1,0.5\n1,2,1\n1,3,0.66666666666666663\n"
                                         "2,0,1\n2,1,1\n2,2,0.5\n2,3,0.66666666666666663\n"
                                         "3,0,1\n3,1,1\n3,2,1\n3,3,1\n";
  const auto r = run({"select", "--scenario", p(dir), "-K", "3", "--format", "stable"});
  REQUIRE(r.code == 0);
  const auto report = mvsel::Report::parse(r.out);
  CHECK(report.get("summary", "selected") == "1 2");
  CHECK(report.get("summary", "pruned") == "3");
  CHECK(run({"select", "--scenario", p(dir), "-K", "0"}).code == 2);
  CHECK(run({"select", "--scenario", p(dir / "missing")}).code == 2);
  CHECK(run({"select", "--scenario", p(dir), "--mode", "fast"}).code == 2);
}

TEST_CASE("size mode with zero tolerance reaches the full oracle") {
  const auto dir = pipeline("cli_size");
  const auto r = run({"select", "--scenario", p(dir / "train"), "-K", "4", "--mode", "size",
                      "--loss-tol", "0", "--format", "stable"});
  REQUIRE(r.code == 0);
  const auto report = mvsel::Report::parse(r.out);
  CHECK(report.get("summary", "max_dataset_loss") == "0");
  CHECK(report.get("summary", "covered_count") == "200");
  CHECK(report.get("summary", "loss_target_met") == "true");
}

TEST_CASE("cv, emit and simulate compose") {
  const auto dir = pipeline("cli_pipeline");
  const auto cv = run({"cv", "--scenario", p(dir / "train"), "--selection", p(dir / "sel.txt"),
                       "--learner", "tree", "--seed", "1", "--format", "stable"});
  REQUIRE(cv.code == 0);
  CHECK(mvsel::Report::parse(cv.out).get("summary", "error_rate") == "0");
  CHECK(run({"cv", "--scenario", p(dir / "train"), "--selection", p(dir / "sel.txt"), "--seed",
             "1", "-k", "500"})
            .code == 2);
  CHECK(run({"cv", "--scenario", p(dir / "train"), "--selection", p(dir / "sel.txt")}).code == 2);

  CHECK(slurp(dir / "tree.dispatch").starts_with("MVDISPATCH v1; arity=2; nodes="));
  CHECK(fs::exists(dir / "tree.dispatch.rendered"));

  const auto sim = run({"simulate", "--scenario", p(dir / "test"), "--selection",
                        p(dir / "sel.txt"), "--dispatcher", p(dir / "tree.dispatch"),
                        "--train-scenario", p(dir / "train"), "--format", "stable"});
  REQUIRE(sim.code == 0);
  const auto report = mvsel::Report::parse(sim.out);
  CHECK(report.get("summary", "fraction_of_representative_oracle") == "1");
  CHECK(report.get("summary", "mispick_rate") == "0");
  CHECK(report.get("summary", "train_test_overlap") == "0");

  // The model file drives simulate identically to the emitted dispatcher.
  const auto via_model = run({"simulate", "--scenario", p(dir / "test"), "--selection",
                              p(dir / "sel.txt"), "--model", p(dir / "tree.model"), "--format",
                              "stable"});
  const auto via_dispatch = run({"simulate", "--scenario", p(dir / "test"), "--selection",
                                 p(dir / "sel.txt"), "--dispatcher", p(dir / "tree.dispatch"),
                                 "--format", "stable"});
  CHECK(via_model.out == via_dispatch.out);

  const auto oracle = run({"simulate", "--scenario", p(dir / "test"), "--selection",
                           p(dir / "sel.txt"), "--oracle"});
  CHECK(mvsel::Report::parse(oracle.out).get("summary", "fraction_of_representative_oracle") == "1");

  const auto overlap = run({"simulate", "--scenario", p(dir / "train"), "--selection",
                            p(dir / "sel.txt"), "--oracle", "--train-scenario", p(dir / "train")});
  CHECK(overlap.out.find("warning = ") != std::string::npos);

  CHECK(run({"simulate", "--scenario", p(dir / "test"), "--selection", p(dir / "sel.txt")}).code == 2);
}

TEST_CASE("ppm models train, cross-validate and simulate") {
  const auto dir = pipeline("cli_ppm");
  for (const char* learner : {"regtree", "linreg"}) {
    const auto model = dir / (std::string(learner) + ".model");
    REQUIRE(run({"train", "--scenario", p(dir / "train"), "--selection", p(dir / "sel.txt"),
                 "--learner", learner, "-o", p(model)})
                .code == 0);
    CHECK(run({"simulate", "--scenario", p(dir / "test"), "--selection", p(dir / "sel.txt"),
               "--model", p(model)})
              .code == 0);
    CHECK(run({"emit", "--model", p(model)}).code == 2);
    CHECK(run({"cv", "--scenario", p(dir / "train"), "--selection", p(dir / "sel.txt"),
               "--learner", learner, "--seed", "2"})
              .code == 0);
  }
}

TEST_CASE("config file values are overridden by flags") {
  const auto dir = scratch_dir("cli_config");
  std::ofstream(dir / "run.toml") << "[gen]\nversions = 3\ndatasets = 10\nfeatures = 1\nseed = 5\n";
  REQUIRE(run({"--config", p(dir / "run.toml"), "gen", "--out", p(dir / "a")}).code == 0);
  const auto first = slurp(dir / "a" / "versions.csv");
  CHECK(std::count(first.begin(), first.end(), '\n') == 4);
  REQUIRE(run({"--config", p(dir / "run.toml"), "gen", "--versions", "4", "--out", p(dir / "b")}).code == 0);
  const auto text = slurp(dir / "b" / "versions.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("help and unknown commands") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"select", "--help"}).code == 0);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
}
