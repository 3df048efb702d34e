#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "mvsel/repselect.hpp"
#include "mvsel/samples.hpp"
#include "mvsel/synthgen.hpp"

using namespace mvsel;

namespace {

std::string tables_text(const Scenario& s, const GroundTruth& g) {
  std::ostringstream out;
  write_versions_csv(out, s.versions());
  write_datasets_csv(out, s.datasets(), s.feature_arity());
  write_runtimes_csv(out, s);
  write_ground_truth_csv(out, g);
  return out.str();
}

}  // namespace

TEST_CASE("shapes follow the config") {
  SynthConfig c;
  c.n_versions = 4;
  c.n_datasets = 100;
  c.feature_arity = 2;
  c.seed = 7;
  const auto [s, g] = generate(c);
  CHECK(s.num_versions() == 4);
  CHECK(s.num_datasets() == 100);
  CHECK(s.to_tables().runtimes.size() == 400);
  CHECK(validate_scenario(s.to_tables()).empty());
  CHECK(g.region_winner.size() == 3);
  for (const auto& d : s.datasets()) {
    for (double x : d.features) {
      CHECK(x >= 0.0);
      CHECK(x < kFeatureBoxHigh);
    }
  }
}

TEST_CASE("noise-free argmax is the planted winner") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    SynthConfig c;
    c.n_versions = 2 + rng.below(7);
    c.n_regions = 1 + rng.below(c.n_versions - 1);
    c.feature_arity = 1 + rng.below(3);
    c.n_datasets = 1 + rng.below(200);
    c.seed = rng.next();
    c.structure_seed = rng.next();
    if (trial % 2) c.feature_levels = 10;
    const auto [s, g] = generate(c);
    const auto m = speedups(s);
    std::vector<VersionId> all(m.version_ids().begin() + 1, m.version_ids().end());
    const auto labels = make_dc_labels(m, s.feature_rows(), all);
    for (std::size_t d = 0; d < s.num_datasets(); ++d) {
      CHECK(labels[d].label == g.winner_of(d));
      CHECK(g.region_of(s.datasets()[d].features) == g.dataset_region[d]);
    }
    Constraints k;
    k.max_versions = c.regions();
    k.min_gain = 0.0;
    const auto set = greedy_select(m, s.baseline().code_size, k);
    const auto metrics = evaluate_set(m, set.selected);
    for (double loss : metrics.per_dataset_loss) CHECK(loss <= 1e-12);
  }
}

TEST_CASE("same seed gives identical bytes; different seeds differ") {
  SynthConfig c;
  c.n_versions = 5;
  c.n_datasets = 50;
  c.noise_sigma = 0.1;
  c.seed = 42;
  c.structure_seed = 42;
  const auto [s1, g1] = generate(c);
  const auto [s2, g2] = generate(c);
  CHECK(tables_text(s1, g1) == tables_text(s2, g2));
  c.seed = 43;
  const auto [s3, g3] = generate(c);
  CHECK(s3.datasets()[0].features != s1.datasets()[0].features);
  CHECK(g3.cuts == g1.cuts);  // same structure seed keeps the regions
  CHECK(g3.region_winner == g1.region_winner);
}

TEST_CASE("the documented generator matches reference values") {
  // SplitMix64 finalizer, checked against an independent implementation.
  CHECK(derive_seed(0, 0) == 0xe220a8397b1dcdafULL);
  CHECK(derive_seed(7, 3) == 10753165928301472203ULL);
  // mt19937_64: the 10000th output for the default seed is fixed by the standard.
  Rng rng(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.next();
  CHECK(x == 9981545732273789042ULL);
}

TEST_CASE("invalid configs are rejected") {
  auto bad = [](auto mutate) {
    SynthConfig c;
    mutate(c);
    try {
      generate(c);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::kInvalidConfig;
    }
    return false;
  };
  CHECK(bad([](SynthConfig& c) { c.n_versions = 1; }));
  CHECK(bad([](SynthConfig& c) { c.n_datasets = 0; }));
  CHECK(bad([](SynthConfig& c) { c.feature_arity = 0; }));
  CHECK(bad([](SynthConfig& c) { c.n_regions = 4; }));
  CHECK(bad([](SynthConfig& c) { c.winner_speedup = {1.0, 2.0}; }));
  CHECK(bad([](SynthConfig& c) { c.winner_speedup = {1.5, 1.2}; }));
  CHECK(bad([](SynthConfig& c) { c.loser_speedup = {0.7, 1.3}; }));
  CHECK(bad([](SynthConfig& c) { c.noise_sigma = -1; }));
  CHECK(bad([](SynthConfig& c) { c.code_size = {0.0, 10.0}; }));
}

TEST_CASE("ground truth file") {
  SynthConfig c;
  c.n_datasets = 3;
  c.first_dataset_id = 10;
  c.seed = 1;
  const auto [s, g] = generate(c);
  std::ostringstream out;
  write_ground_truth_csv(out, g);
  const auto text = out.str();
  CHECK(text.starts_with("dataset_id,true_best_version_id\n10,"));
  const auto dir = testing::scratch_dir("synth");
  write_synthetic_dir(s, g, dir);
  for (const char* f : {"versions.csv", "datasets.csv", "runtimes.csv", "ground_truth.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  CHECK(testing::slurp(dir / "ground_truth.csv") == text);
}
