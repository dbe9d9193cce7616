#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascadeforge/dataset.hpp"
#include "cascadeforge/evaluation.hpp"
#include "cascadeforge/training.hpp"
#include "cascadeforge/weighting.hpp"

using namespace cascadeforge;

namespace {

struct Fixture {
  Dataset train;
  Dataset val;
  Dataset test;
  StrategyConfig config;
};

Fixture make_fixture() {
  SyntheticSpec spec;
  spec.n_samples = 700;
  spec.dim_shared = 4;
  spec.dim_main_only = 8;
  spec.positive_fraction = 0.3;
  spec.hard_negative_fraction = 0.25;
  Dataset data = generate_synthetic(spec, 101);
  SplitResult parts = split(data, {0.6, 0.2, 0.2}, 202);

  StrategyConfig config;
  config.k_pre = 24;
  config.k_main = 192;
  config.pre_train.epochs = 12;
  config.pre_train.batch_size = 32;
  config.pre_train.seed = 3;
  config.main_train.epochs = 12;
  config.main_train.batch_size = 32;
  config.main_train.seed = 4;
  config.target_pass_rate = 0.3;
  config.ga.population_size = 4;
  config.ga.generations = 1;
  config.ga.elitism_count = 1;
  config.ga.seed = 5;
  return {std::move(parts.train), std::move(parts.val), std::move(parts.test),
          std::move(config)};
}

const LogisticModel& stage_model(const CascadePipeline& p, bool pre) {
  const Scorer& scorer = pre ? p.pre_scorer() : p.main_scorer();
  auto* linear = dynamic_cast<const LinearTextScorer*>(&scorer);
  REQUIRE(linear != nullptr);
  return linear->model();
}

}  // namespace

TEST_CASE("strategy names round-trip") {
  for (Strategy s : {Strategy::independent, Strategy::sequential, Strategy::feedback}) {
    CHECK(strategy_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(strategy_from_string("parallel"), std::invalid_argument);
}

TEST_CASE("strategy config validation") {
  StrategyConfig config;
  CHECK_NOTHROW(config.validate());
  StrategyConfig bad = config;
  bad.target_pass_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.target_pass_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.k_pre = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.main_score_folds = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("the weighting gene space") {
  std::vector<GeneBounds> bounds = feedback_gene_bounds();
  REQUIRE(bounds.size() == 4);
  CHECK(bounds[0].lo == 0.0);
  CHECK(bounds[0].hi == 100.0);
  CHECK(bounds[1].lo == 0.0);
  CHECK(bounds[1].hi == 100.0);
  CHECK(bounds[2].lo == 0.0);
  CHECK(bounds[2].hi == 1.0);
  CHECK(bounds[3].lo == 1.0);
  CHECK(bounds[3].hi == 10.0);
}

TEST_CASE("chromosomes decode to weight parameters") {
  WeightParams p = params_from_chromosome({4.0, 10.0, 0.25, 3.0});
  CHECK(p.t_pos == 0.25);
  CHECK(p.t_neg == 0.1);
  CHECK(p.w_neg_min == 0.25);
  CHECK(p.w_max == 3.0);
  CHECK(p.a_pos == 2.0);
  CHECK(p.a_neg == 1.0);

  WeightParams flat = params_from_chromosome({0.0, 0.0, 0.5, 1.0});
  CHECK(flat.t_pos == WeightParams::kFlatTemperature);
  CHECK(flat.t_neg == WeightParams::kFlatTemperature);

  CHECK_THROWS_AS(params_from_chromosome({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("the uniform chromosome weighs every sample exactly one") {
  WeightParams p = params_from_chromosome(uniform_chromosome());
  for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    CHECK(sample_weight(s, 1, p) == 1.0);
    CHECK(sample_weight(s, 0, p) == 1.0);
  }
}

TEST_CASE("independent training calibrates to the target rate") {
  Fixture f = make_fixture();
  TrainedPipeline tp = train_independent(f.train, f.train, f.val, f.config);
  CHECK(!tp.has_feedback_search);

  double measured = measure_pass_rate(tp.pipeline, f.val);
  double tolerance = 1.0 / static_cast<double>(f.val.size());
  CHECK(std::abs(measured - f.config.target_pass_rate) <= tolerance + 1e-12);
  CHECK(tp.pipeline.th_main() == 0.5);

  PipelineReport report = evaluate_pipeline(tp.pipeline, f.val, "independent");
  CHECK(report.f1_e2e > 0.0);
}

TEST_CASE("feedback shares its main stage with independent and never scores lower") {
  Fixture f = make_fixture();
  TrainedPipeline ind = train_independent(f.train, f.train, f.val, f.config);
  TrainedPipeline fb = train_feedback(f.train, f.train, f.val, f.config);

  CHECK(fb.has_feedback_search);
  CHECK(stage_model(fb.pipeline, false).weights == stage_model(ind.pipeline, false).weights);
  CHECK(stage_model(fb.pipeline, false).bias == stage_model(ind.pipeline, false).bias);

  double ind_f1 = evaluate_pipeline(ind.pipeline, f.val).f1_e2e;
  double fb_f1 = evaluate_pipeline(fb.pipeline, f.val).f1_e2e;
  CHECK(fb_f1 >= ind_f1 - 1e-9);

  // The reported best fitness is the validation F1 of the returned pipeline.
  CHECK(fb.ga_best_fitness == doctest::Approx(fb_f1).epsilon(1e-12));

  // Elitism keeps the best-fitness curve monotone.
  REQUIRE(!fb.ga_history.empty());
  for (std::size_t i = 1; i < fb.ga_history.size(); ++i) {
    CHECK(fb.ga_history[i].best_fitness >= fb.ga_history[i - 1].best_fitness);
  }
  CHECK(fb.ga_fitness_evaluations > 0);
  CHECK(fb.best_chromosome.size() == 4);
  CHECK_NOTHROW(fb.weight_params.validate());
}

TEST_CASE("feedback training is deterministic end to end") {
  Fixture f = make_fixture();
  TrainedPipeline a = train_feedback(f.train, f.train, f.val, f.config);
  TrainedPipeline b = train_feedback(f.train, f.train, f.val, f.config);
  CHECK(a.best_chromosome == b.best_chromosome);
  CHECK(a.ga_best_fitness == b.ga_best_fitness);
  CHECK(stage_model(a.pipeline, true).weights == stage_model(b.pipeline, true).weights);
  CHECK(a.pipeline.th_pre() == b.pipeline.th_pre());
}

TEST_CASE("a fully open gate makes sequential equal independent") {
  Fixture f = make_fixture();
  f.config.target_pass_rate = 1.0;
  TrainedPipeline ind = train_independent(f.train, f.train, f.val, f.config);
  TrainedPipeline seq = train_sequential(f.train, f.train, f.val, f.config);
  CHECK(stage_model(seq.pipeline, false).weights == stage_model(ind.pipeline, false).weights);
  CHECK(stage_model(seq.pipeline, false).bias == stage_model(ind.pipeline, false).bias);
  CHECK(stage_model(seq.pipeline, true).weights == stage_model(ind.pipeline, true).weights);
}

TEST_CASE("a tight gate changes the sequential main stage") {
  Fixture f = make_fixture();
  TrainedPipeline ind = train_independent(f.train, f.train, f.val, f.config);
  TrainedPipeline seq = train_sequential(f.train, f.train, f.val, f.config);
  CHECK(stage_model(seq.pipeline, false).weights != stage_model(ind.pipeline, false).weights);
}

TEST_CASE("all strategies hit the same measured pass rate") {
  Fixture f = make_fixture();
  std::vector<double> rates;
  for (Strategy s : {Strategy::independent, Strategy::sequential, Strategy::feedback}) {
    TrainedPipeline tp = train_strategy(s, f.train, f.val, f.config);
    rates.push_back(measure_pass_rate(tp.pipeline, f.val));
  }
  double tolerance = 1.0 / static_cast<double>(f.val.size());
  for (double r : rates) {
    CHECK(std::abs(r - rates[0]) <= tolerance + 1e-12);
  }
}

TEST_CASE("the dispatcher matches the direct entry points") {
  Fixture f = make_fixture();
  TrainedPipeline direct = train_independent(f.train, f.train, f.val, f.config);
  TrainedPipeline via = train_strategy(Strategy::independent, f.train, f.val, f.config);
  CHECK(stage_model(via.pipeline, true).weights == stage_model(direct.pipeline, true).weights);
  CHECK(via.pipeline.th_pre() == direct.pipeline.th_pre());
}

TEST_CASE("sequential reports a survivor collapse") {
  // Perfectly separable classes with identical texts: the calibrated gate
  // ties at the positive score and strict-greater gating starves the main
  // stage of survivors.
  std::vector<Sample> train_rows, val_rows;
  std::int64_t id = 0;
  for (int i = 0; i < 30; ++i) train_rows.push_back({id++, "good great fine", 1});
  for (int i = 0; i < 70; ++i) train_rows.push_back({id++, "bad awful poor", 0});
  for (int i = 0; i < 12; ++i) val_rows.push_back({id++, "good great fine", 1});
  for (int i = 0; i < 28; ++i) val_rows.push_back({id++, "bad awful poor", 0});
  Dataset train_data(train_rows, "sep/train");
  Dataset val_data(val_rows, "sep/val");

  StrategyConfig config;
  config.k_pre = 8;
  config.k_main = 16;
  config.pre_train.epochs = 10;
  config.main_train.epochs = 10;
  config.target_pass_rate = 0.1;
  try {
    train_sequential(train_data, train_data, val_data, config);
    FAIL("expected a survivor collapse");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("survivor") != std::string::npos);
  }
}
