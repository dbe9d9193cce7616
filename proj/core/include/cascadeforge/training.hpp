#pragma once

#include <string>
#include <vector>

#include "cascadeforge/cascade.hpp"
#include "cascadeforge/dataset.hpp"
#include "cascadeforge/ga.hpp"
#include "cascadeforge/linear_model.hpp"
#include "cascadeforge/weighting.hpp"

namespace cascadeforge {

enum class Strategy { independent, sequential, feedback };

std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

struct StrategyConfig {
  TrainConfig pre_train{.class_balanced = true};
  TrainConfig main_train{};
  double target_pass_rate = 0.3;
  std::size_t k_pre = 2000;
  std::size_t k_main = 20000;
  FeaturizerConfig features{};
  GaConfig ga{};
  // Multiply feedback weights with balanced class weights (on when the pre
  // stage uses class balancing at all).
  bool compose_class_weights = true;
  // 1 trains the guide once and scores its own training data in-sample;
  // k > 1 cross-scores via k folds.
  int main_score_folds = 1;

  void validate() const;
};

struct TrainedPipeline {
  CascadePipeline pipeline;
  CalibrationResult calibration;  // pre-gate calibration on the validation split

  // Populated by the feedback strategy only.
  bool has_feedback_search = false;
  WeightParams weight_params{};
  Chromosome best_chromosome{};
  double ga_best_fitness = 0.0;
  std::vector<GaGenerationStats> ga_history{};
  std::size_t ga_fitness_evaluations = 0;
};

// Both stages trained on their own data with no coupling; the pre gate is
// then calibrated on validation pre-scores to the target pass rate.
// pre_data and main_data differ only under fewshot subsampling.
TrainedPipeline train_independent(const Dataset& pre_data, const Dataset& main_data,
                                  const Dataset& val, const StrategyConfig& config);

// Pre trained and calibrated first; main trained only on the samples of
// main_data that pass the gate. Throws when the survivors lack a class.
TrainedPipeline train_sequential(const Dataset& pre_data, const Dataset& main_data,
                                 const Dataset& val, const StrategyConfig& config);

// Main trained first on main_data, then its scores on pre_data drive the
// sample weighting whose parameters a GA tunes to maximize end-to-end F1 on
// validation. The flat-curve chromosome is always seeded, so with elitism
// the search never falls below the independent baseline.
TrainedPipeline train_feedback(const Dataset& pre_data, const Dataset& main_data,
                               const Dataset& val, const StrategyConfig& config);

TrainedPipeline train_strategy(Strategy strategy, const Dataset& pre_data,
                               const Dataset& main_data, const Dataset& val,
                               const StrategyConfig& config);

inline TrainedPipeline train_strategy(Strategy strategy, const Dataset& train,
                                      const Dataset& val, const StrategyConfig& config) {
  return train_strategy(strategy, train, train, val, config);
}

// Gene space of the weighting search: inverse temperatures for both
// branches (0 means a flat curve), then w_neg_min and w_max.
std::vector<GeneBounds> feedback_gene_bounds();
WeightParams params_from_chromosome(const Chromosome& genes);
// The chromosome whose weight curve is constant 1: flat temperatures,
// w_neg_min 0.5, w_max 1.
Chromosome uniform_chromosome();

}  // namespace cascadeforge
