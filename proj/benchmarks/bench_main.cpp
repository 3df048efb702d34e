#include <benchmark/benchmark.h>

#include <vector>

#include "mvsel/dispatch.hpp"
#include "mvsel/repselect.hpp"
#include "mvsel/rules.hpp"
#include "mvsel/samples.hpp"
#include "mvsel/synthgen.hpp"
#include "mvsel/tree.hpp"

namespace {

using namespace mvsel;

Scenario make_scenario(std::size_t versions, std::size_t datasets) {
  SynthConfig c;
  c.n_versions = versions;
  c.n_datasets = datasets;
  c.n_regions = versions - 1;
  c.feature_arity = 2;
  c.noise_sigma = 0.05;
  c.seed = 3;
  c.structure_seed = 3;
  return generate(c).first;
}

Constraints top_k(std::size_t k) {
  Constraints c;
  c.max_versions = k;
  return c;
}

void BM_GreedySelect(benchmark::State& state) {
  const auto scenario = make_scenario(static_cast<std::size_t>(state.range(0)), 1000);
  const auto m = speedups(scenario);
  const auto k = top_k(8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(greedy_select(m, scenario.baseline().code_size, k));
  }
}
BENCHMARK(BM_GreedySelect)->Arg(16)->Arg(64)->Arg(256);

std::vector<LabeledSample> labels(std::size_t datasets) {
  const auto scenario = make_scenario(6, datasets);
  const auto m = speedups(scenario);
  const auto rep = greedy_select(m, scenario.baseline().code_size, top_k(5)).selected;
  return make_dc_labels(m, scenario.feature_rows(), rep);
}

void BM_TrainTree(benchmark::State& state) {
  const auto samples = labels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(train_tree_classifier(samples));
}
BENCHMARK(BM_TrainTree)->Arg(200)->Arg(2000);

void BM_TrainRules(benchmark::State& state) {
  const auto samples = labels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(train_rule_list(samples));
}
BENCHMARK(BM_TrainRules)->Arg(200)->Arg(2000);

void BM_EvalDispatcher(benchmark::State& state) {
  const auto samples = labels(2000);
  const auto spec = compile_dispatcher(train_tree_classifier(samples));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_dispatcher(spec, samples[i].features));
    i = (i + 1) % samples.size();
  }
}
BENCHMARK(BM_EvalDispatcher);

}  // namespace

BENCHMARK_MAIN();
