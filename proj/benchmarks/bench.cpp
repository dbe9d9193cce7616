#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "cascadeforge/cascade.hpp"
#include "cascadeforge/dataset.hpp"
#include "cascadeforge/features.hpp"
#include "cascadeforge/ga.hpp"
#include "cascadeforge/linear_model.hpp"
#include "cascadeforge/rng.hpp"
#include "cascadeforge/training.hpp"
#include "cascadeforge/weighting.hpp"

namespace {

using namespace cascadeforge;

const Dataset& corpus() {
  static const Dataset data = [] {
    SyntheticSpec spec;
    spec.n_samples = 2000;
    return generate_synthetic(spec, 42);
  }();
  return data;
}

const Vocabulary& vocab() {
  static const Vocabulary v = select_top_k(chi2_scores(corpus()), 512);
  return v;
}

void BM_Tokenize(benchmark::State& state) {
  const std::string& text = corpus()[0].text;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tokenize(text));
  }
}
BENCHMARK(BM_Tokenize);

void BM_Vectorize(benchmark::State& state) {
  const std::string& text = corpus()[0].text;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vectorize(text, vocab()));
  }
}
BENCHMARK(BM_Vectorize);

void BM_Chi2Scores(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(chi2_scores(corpus()));
  }
}
BENCHMARK(BM_Chi2Scores);

void BM_SampleWeight(benchmark::State& state) {
  WeightParams params;
  double s = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_weight(s, 1, params));
    s += 1e-4;
    if (s > 1.0) s = 0.0;
  }
}
BENCHMARK(BM_SampleWeight);

void BM_TrainEpoch(benchmark::State& state) {
  const std::vector<FeatureVector> vecs = vectorize_all(corpus(), vocab());
  const std::vector<int> labels = corpus().labels();
  const SampleWeights weights(vecs.size(), 1.0);
  TrainConfig cfg;
  cfg.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(vecs, labels, weights, vocab().capacity(), cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) *
                          static_cast<std::int64_t>(vecs.size()));
}
BENCHMARK(BM_TrainEpoch)->Arg(1)->Arg(5);

void BM_CalibrateThreshold(benchmark::State& state) {
  Rng rng(7);
  std::vector<double> scores(static_cast<std::size_t>(state.range(0)));
  for (double& s : scores) s = rng.uniform01();
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate_threshold(scores, 0.3));
  }
}
BENCHMARK(BM_CalibrateThreshold)->Arg(1000)->Arg(100000);

void BM_GaSphere(benchmark::State& state) {
  const auto fitness = [](const Chromosome& genes) {
    double total = 0.0;
    for (double g : genes) total -= (g - 0.5) * (g - 0.5);
    return total;
  };
  const std::vector<GeneBounds> bounds(4, GeneBounds{0.0, 1.0});
  GaConfig cfg;
  cfg.generations = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_ga(fitness, bounds, cfg));
  }
}
BENCHMARK(BM_GaSphere)->Arg(10)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
