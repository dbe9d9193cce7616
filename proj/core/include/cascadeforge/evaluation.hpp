#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "cascadeforge/cascade.hpp"
#include "cascadeforge/dataset.hpp"

namespace cascadeforge {

// Confusion counts with the 0/0 -> 0 convention so closed-gate pipelines
// still produce finite reports.
struct StageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
};

StageMetrics precision_recall_f1(std::span<const int> predictions, std::span<const int> labels);

struct E2eMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Pipeline precision equals the second stage's precision; pipeline recall is
// the product of stage recalls; F1 is their harmonic mean.
E2eMetrics compose_e2e(double r_pre, double p_main, double r_main);

struct PipelineReport {
  std::string strategy;
  std::string split;
  std::int64_t n = 0;
  std::int64_t n_pos = 0;
  double p_pre = 0.0;
  double r_pre = 0.0;
  double p_main = 0.0;   // measured on the passed subset
  double r_main = 0.0;   // measured on the passed subset
  double p_e2e = 0.0;
  double r_e2e = 0.0;
  double f1_e2e = 0.0;
  double pass_rate = 0.0;
  std::int64_t main_calls = 0;
};

// Runs the pipeline over every sample and aggregates stage plus end-to-end
// counts. Throws when the dataset is empty or holds no positive label.
PipelineReport evaluate_pipeline(const CascadePipeline& pipeline, const Dataset& data,
                                 const std::string& strategy_tag = "");

// (treatment - baseline) / baseline; throws when baseline is not positive.
double relative_improvement(double baseline_f1, double treatment_f1);

}  // namespace cascadeforge
