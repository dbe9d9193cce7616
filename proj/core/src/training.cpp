#include "cascadeforge/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "cascadeforge/log.hpp"

namespace cascadeforge {

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::independent: return "independent";
    case Strategy::sequential: return "sequential";
    case Strategy::feedback: return "feedback";
  }
  throw std::logic_error("to_string: unknown strategy");
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "independent") return Strategy::independent;
  if (name == "sequential") return Strategy::sequential;
  if (name == "feedback") return Strategy::feedback;
  throw std::invalid_argument("unknown strategy '" + name +
                              "' (expected independent, sequential or feedback)");
}

void StrategyConfig::validate() const {
  pre_train.validate();
  main_train.validate();
  if (!(target_pass_rate > 0.0 && target_pass_rate <= 1.0)) {
    throw std::invalid_argument("StrategyConfig: target_pass_rate must lie in (0, 1]");
  }
  if (k_pre == 0 || k_main == 0) {
    throw std::invalid_argument("StrategyConfig: feature budgets must be positive");
  }
  if (main_score_folds < 1) {
    throw std::invalid_argument("StrategyConfig: main_score_folds must be >= 1");
  }
}

namespace {

struct Stage {
  Vocabulary vocab;
  LogisticModel model;
};

Vocabulary build_vocab(const Dataset& data, std::size_t k, const FeaturizerConfig& fc) {
  return select_top_k(chi2_scores(data, fc), k);
}

LogisticModel fit(const Dataset& data, const Vocabulary& vocab, const FeaturizerConfig& fc,
                  const TrainConfig& cfg, const SampleWeights& weights) {
  const std::vector<FeatureVector> vecs = vectorize_all(data, vocab, fc);
  const std::vector<int> labels = data.labels();
  return train(vecs, labels, weights, vocab.capacity(), cfg);
}

LogisticModel fit_unweighted(const Dataset& data, const Vocabulary& vocab,
                             const FeaturizerConfig& fc, const TrainConfig& cfg) {
  return fit(data, vocab, fc, cfg, SampleWeights(data.size(), 1.0));
}

std::vector<double> score_all(const LogisticModel& model,
                              const std::vector<FeatureVector>& vecs) {
  std::vector<double> scores;
  scores.reserve(vecs.size());
  for (const FeatureVector& v : vecs) scores.push_back(model.score(v));
  return scores;
}

// End-to-end F1 from cached stage scores; mirrors evaluate_pipeline's
// counting and conventions exactly.
double f1_from_scores(const std::vector<double>& pre_scores,
                      const std::vector<double>& main_scores,
                      const std::vector<int>& labels, double th_pre, double th_main) {
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool final_positive = pre_scores[i] > th_pre && main_scores[i] > th_main;
    if (final_positive && labels[i] == 1) ++tp;
    else if (final_positive) ++fp;
    else if (labels[i] == 1) ++fn;
  }
  const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

CalibrationResult calibrate_on(const std::vector<double>& scores, double rate,
                               const char* who) {
  CalibrationResult calib = calibrate_threshold(scores, rate);
  if (calib.degenerate) {
    log::warn(std::string(who) + ": score ties at the calibration cut; " +
              std::to_string(calib.passing_count) + " pass instead of " +
              std::to_string(calib.target_count));
  }
  return calib;
}

// Main-stage scores over pre_data. With folds == 1 the full-data guide
// scores its own training samples; otherwise each round-robin fold of
// pre_data is scored by a guide trained on main_data minus that fold.
std::vector<ScoredSample> guide_scores(const Dataset& pre_data, const Dataset& main_data,
                                       const Stage& main_stage, const StrategyConfig& cfg) {
  const std::vector<FeatureVector> vecs = vectorize_all(pre_data, main_stage.vocab, cfg.features);
  std::vector<ScoredSample> scored(pre_data.size());
  for (std::size_t i = 0; i < pre_data.size(); ++i) scored[i].label = pre_data[i].label;

  if (cfg.main_score_folds == 1) {
    for (std::size_t i = 0; i < pre_data.size(); ++i) {
      scored[i].main_score = main_stage.model.score(vecs[i]);
    }
    return scored;
  }

  const auto folds = static_cast<std::size_t>(cfg.main_score_folds);
  const std::vector<FeatureVector> main_vecs =
      vectorize_all(main_data, main_stage.vocab, cfg.features);
  const std::vector<int> main_labels = main_data.labels();
  for (std::size_t f = 0; f < folds; ++f) {
    std::unordered_set<std::int64_t> held_out;
    for (std::size_t i = f; i < pre_data.size(); i += folds) held_out.insert(pre_data[i].id);

    std::vector<FeatureVector> fold_vecs;
    std::vector<int> fold_labels;
    for (std::size_t i = 0; i < main_data.size(); ++i) {
      if (held_out.count(main_data[i].id)) continue;
      fold_vecs.push_back(main_vecs[i]);
      fold_labels.push_back(main_labels[i]);
    }
    const LogisticModel guide =
        train(fold_vecs, fold_labels, SampleWeights(fold_vecs.size(), 1.0),
              main_stage.vocab.capacity(), cfg.main_train);
    for (std::size_t i = f; i < pre_data.size(); i += folds) {
      scored[i].main_score = guide.score(vecs[i]);
    }
  }
  return scored;
}

TrainedPipeline assemble(Stage pre, Stage main, CalibrationResult calib,
                         const StrategyConfig& cfg) {
  auto pre_scorer = std::make_shared<LinearTextScorer>(std::move(pre.model),
                                                       std::move(pre.vocab), cfg.features);
  auto main_scorer = std::make_shared<LinearTextScorer>(std::move(main.model),
                                                        std::move(main.vocab), cfg.features);
  return TrainedPipeline{
      CascadePipeline(std::move(pre_scorer), std::move(main_scorer), calib.threshold),
      calib};
}

}  // namespace

TrainedPipeline train_independent(const Dataset& pre_data, const Dataset& main_data,
                                  const Dataset& val, const StrategyConfig& config) {
  config.validate();
  Stage pre{build_vocab(pre_data, config.k_pre, config.features), {}};
  pre.model = fit_unweighted(pre_data, pre.vocab, config.features, config.pre_train);
  Stage main{build_vocab(main_data, config.k_main, config.features), {}};
  main.model = fit_unweighted(main_data, main.vocab, config.features, config.main_train);

  const std::vector<double> val_scores =
      score_all(pre.model, vectorize_all(val, pre.vocab, config.features));
  const CalibrationResult calib =
      calibrate_on(val_scores, config.target_pass_rate, "train_independent");
  return assemble(std::move(pre), std::move(main), calib, config);
}

TrainedPipeline train_sequential(const Dataset& pre_data, const Dataset& main_data,
                                 const Dataset& val, const StrategyConfig& config) {
  config.validate();
  Stage pre{build_vocab(pre_data, config.k_pre, config.features), {}};
  pre.model = fit_unweighted(pre_data, pre.vocab, config.features, config.pre_train);

  const std::vector<double> val_scores =
      score_all(pre.model, vectorize_all(val, pre.vocab, config.features));
  const CalibrationResult calib =
      calibrate_on(val_scores, config.target_pass_rate, "train_sequential");

  std::vector<Sample> survivors;
  for (const Sample& s : main_data) {
    const FeatureVector v = vectorize(s.text, pre.vocab, config.features);
    if (pre.model.score(v) > calib.threshold) survivors.push_back(s);
  }
  Dataset surviving(std::move(survivors), main_data.name() + "/survivors");
  if (surviving.empty() || surviving.positives() == 0 ||
      surviving.positives() == surviving.size()) {
    throw std::runtime_error("train_sequential: gate leaves " +
                             std::to_string(surviving.size()) + " survivors (" +
                             std::to_string(surviving.positives()) +
                             " positive); need both classes");
  }
  log::info("train_sequential: main stage trains on " + std::to_string(surviving.size()) +
            " of " + std::to_string(main_data.size()) + " samples");

  Stage main{build_vocab(surviving, config.k_main, config.features), {}};
  main.model = fit_unweighted(surviving, main.vocab, config.features, config.main_train);
  return assemble(std::move(pre), std::move(main), calib, config);
}

TrainedPipeline train_feedback(const Dataset& pre_data, const Dataset& main_data,
                               const Dataset& val, const StrategyConfig& config) {
  config.validate();
  Stage main{build_vocab(main_data, config.k_main, config.features), {}};
  main.model = fit_unweighted(main_data, main.vocab, config.features, config.main_train);

  const Vocabulary pre_vocab = build_vocab(pre_data, config.k_pre, config.features);
  const std::vector<FeatureVector> pre_vecs = vectorize_all(pre_data, pre_vocab, config.features);
  const std::vector<int> pre_labels = pre_data.labels();
  const std::vector<ScoredSample> scored = guide_scores(pre_data, main_data, main, config);

  const std::vector<FeatureVector> val_pre_vecs = vectorize_all(val, pre_vocab, config.features);
  const std::vector<double> val_main_scores =
      score_all(main.model, vectorize_all(val, main.vocab, config.features));
  const std::vector<int> val_labels = val.labels();

  TrainConfig pre_cfg = config.pre_train;
  if (!config.compose_class_weights) pre_cfg.class_balanced = false;

  std::map<Chromosome, double> cache;
  const auto fitness = [&](const Chromosome& genes) -> double {
    if (auto it = cache.find(genes); it != cache.end()) return it->second;
    double f1 = -std::numeric_limits<double>::infinity();
    try {
      const WeightParams params = params_from_chromosome(genes);
      const SampleWeights weights = compute_weights(scored, params);
      const LogisticModel candidate =
          train(pre_vecs, pre_labels, weights, pre_vocab.capacity(), pre_cfg);
      const std::vector<double> val_scores = score_all(candidate, val_pre_vecs);
      const CalibrationResult calib = calibrate_threshold(val_scores, config.target_pass_rate);
      f1 = f1_from_scores(val_scores, val_main_scores, val_labels, calib.threshold, 0.5);
    } catch (const std::exception& e) {
      log::debug(std::string("train_feedback: candidate rejected: ") + e.what());
    }
    cache.emplace(genes, f1);
    return f1;
  };

  GaConfig ga_cfg = config.ga;
  const Chromosome uniform = uniform_chromosome();
  if (std::find(ga_cfg.seeded_chromosomes.begin(), ga_cfg.seeded_chromosomes.end(), uniform) ==
      ga_cfg.seeded_chromosomes.end()) {
    ga_cfg.seeded_chromosomes.insert(ga_cfg.seeded_chromosomes.begin(), uniform);
  }
  const GaResult ga = run_ga(fitness, feedback_gene_bounds(), ga_cfg);
  log::info("train_feedback: best validation f1 " + std::to_string(ga.best_fitness) + " after " +
            std::to_string(ga.fitness_evaluations) + " fitness evaluations");

  const WeightParams best_params = params_from_chromosome(ga.best);
  const SampleWeights weights = compute_weights(scored, best_params);
  Stage pre{pre_vocab, train(pre_vecs, pre_labels, weights, pre_vocab.capacity(), pre_cfg)};
  const std::vector<double> val_scores = score_all(pre.model, val_pre_vecs);
  const CalibrationResult calib =
      calibrate_on(val_scores, config.target_pass_rate, "train_feedback");

  TrainedPipeline out = assemble(std::move(pre), std::move(main), calib, config);
  out.has_feedback_search = true;
  out.weight_params = best_params;
  out.best_chromosome = ga.best;
  out.ga_best_fitness = ga.best_fitness;
  out.ga_history = ga.history;
  out.ga_fitness_evaluations = ga.fitness_evaluations;
  return out;
}

TrainedPipeline train_strategy(Strategy strategy, const Dataset& pre_data,
                               const Dataset& main_data, const Dataset& val,
                               const StrategyConfig& config) {
  switch (strategy) {
    case Strategy::independent: return train_independent(pre_data, main_data, val, config);
    case Strategy::sequential: return train_sequential(pre_data, main_data, val, config);
    case Strategy::feedback: return train_feedback(pre_data, main_data, val, config);
  }
  throw std::logic_error("train_strategy: unknown strategy");
}

std::vector<GeneBounds> feedback_gene_bounds() {
  return {{0.0, 100.0}, {0.0, 100.0}, {0.0, 1.0}, {1.0, 10.0}};
}

WeightParams params_from_chromosome(const Chromosome& genes) {
  if (genes.size() != 4) {
    throw std::invalid_argument("params_from_chromosome: expected 4 genes");
  }
  WeightParams p;
  p.t_pos = genes[0] > 0.0 ? 1.0 / genes[0] : WeightParams::kFlatTemperature;
  p.t_neg = genes[1] > 0.0 ? 1.0 / genes[1] : WeightParams::kFlatTemperature;
  p.w_neg_min = genes[2];
  p.w_max = genes[3];
  p.validate();
  return p;
}

Chromosome uniform_chromosome() { return {0.0, 0.0, 0.5, 1.0}; }

}  // namespace cascadeforge
