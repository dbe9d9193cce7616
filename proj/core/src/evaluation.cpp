#include "cascadeforge/evaluation.hpp"

#include <stdexcept>
#include <vector>

namespace cascadeforge {

namespace {

double safe_ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic_f1(double p, double r) {
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace

StageMetrics precision_recall_f1(std::span<const int> predictions,
                                 std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("precision_recall_f1: predictions and labels differ in length");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("precision_recall_f1: empty input");
  }
  StageMetrics m;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool predicted = predictions[i] == 1;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++m.tp;
    else if (predicted) ++m.fp;
    else if (actual) ++m.fn;
    else ++m.tn;
  }
  m.precision = safe_ratio(m.tp, m.tp + m.fp);
  m.recall = safe_ratio(m.tp, m.tp + m.fn);
  m.f1 = harmonic_f1(m.precision, m.recall);
  return m;
}

E2eMetrics compose_e2e(double r_pre, double p_main, double r_main) {
  E2eMetrics e;
  e.precision = p_main;
  e.recall = r_pre * r_main;
  e.f1 = harmonic_f1(e.precision, e.recall);
  return e;
}

PipelineReport evaluate_pipeline(const CascadePipeline& pipeline, const Dataset& data,
                                 const std::string& strategy_tag) {
  if (data.empty()) throw std::invalid_argument("evaluate_pipeline: empty dataset");
  if (data.positives() == 0) {
    throw std::invalid_argument("evaluate_pipeline: dataset holds no positive label");
  }

  const std::size_t n = data.size();
  std::vector<int> gate_predictions(n);
  std::vector<int> final_predictions(n);
  std::vector<int> labels(n);
  std::vector<int> passed_predictions;
  std::vector<int> passed_labels;
  std::int64_t main_calls = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = data[i];
    const PipelinePrediction pred = pipeline.infer(s.text);
    labels[i] = s.label;
    gate_predictions[i] = pred.passed_pre ? 1 : 0;
    final_predictions[i] = pred.final_label;
    if (pred.main_called) {
      ++main_calls;
      passed_predictions.push_back(pred.final_label);
      passed_labels.push_back(s.label);
    }
  }

  PipelineReport report;
  report.strategy = strategy_tag;
  report.n = static_cast<std::int64_t>(n);
  report.n_pos = static_cast<std::int64_t>(data.positives());
  report.main_calls = main_calls;
  report.pass_rate = static_cast<double>(main_calls) / static_cast<double>(n);

  const StageMetrics gate = precision_recall_f1(gate_predictions, labels);
  report.p_pre = gate.precision;
  report.r_pre = gate.recall;
  if (!passed_predictions.empty()) {
    const StageMetrics main = precision_recall_f1(passed_predictions, passed_labels);
    report.p_main = main.precision;
    report.r_main = main.recall;
  }
  const StageMetrics e2e = precision_recall_f1(final_predictions, labels);
  report.p_e2e = e2e.precision;
  report.r_e2e = e2e.recall;
  report.f1_e2e = e2e.f1;
  return report;
}

double relative_improvement(double baseline_f1, double treatment_f1) {
  if (!(baseline_f1 > 0.0)) {
    throw std::invalid_argument("relative_improvement: baseline must be positive");
  }
  return (treatment_f1 - baseline_f1) / baseline_f1;
}

}  // namespace cascadeforge
