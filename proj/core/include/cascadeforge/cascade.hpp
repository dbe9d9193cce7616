#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cascadeforge/features.hpp"
#include "cascadeforge/linear_model.hpp"

namespace cascadeforge {

// Anything that maps text to a score in [0,1] can serve as a stage.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(std::string_view text) const = 0;
};

// Logistic model applied to a vocabulary-restricted bag of words.
class LinearTextScorer : public Scorer {
 public:
  LinearTextScorer(LogisticModel model, Vocabulary vocab, FeaturizerConfig config = {});

  double score(std::string_view text) const override;
  double score(const FeatureVector& v) const { return model_.score(v); }

  const LogisticModel& model() const { return model_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const FeaturizerConfig& featurizer() const { return config_; }

 private:
  LogisticModel model_;
  Vocabulary vocab_;
  FeaturizerConfig config_;
};

struct PipelinePrediction {
  double pre_score = 0.0;
  std::optional<double> main_score;
  bool passed_pre = false;
  bool main_called = false;
  int final_label = 0;
};

// Two-stage gate: the first stage rejects cheaply, the second decides.
// Gating is strict-greater at both stages; equality rejects.
class CascadePipeline {
 public:
  CascadePipeline(std::shared_ptr<const Scorer> pre, std::shared_ptr<const Scorer> main,
                  double th_pre, double th_main = 0.5);

  PipelinePrediction infer(std::string_view text) const;

  const Scorer& pre_scorer() const { return *pre_; }
  const Scorer& main_scorer() const { return *main_; }
  std::shared_ptr<const Scorer> pre_ptr() const { return pre_; }
  std::shared_ptr<const Scorer> main_ptr() const { return main_; }
  double th_pre() const { return th_pre_; }
  double th_main() const { return th_main_; }
  void set_th_pre(double th) { th_pre_ = th; }

  // Directory layout: pre/main model + vocabulary files and a threshold
  // manifest. Requires both stages to be LinearTextScorer.
  void save(const std::string& dir) const;
  static CascadePipeline load(const std::string& dir);

 private:
  std::shared_ptr<const Scorer> pre_;
  std::shared_ptr<const Scorer> main_;
  double th_pre_;
  double th_main_;
};

struct CalibrationResult {
  double threshold = 0.0;
  std::size_t target_count = 0;   // ceil(pass_rate * n)
  std::size_t passing_count = 0;  // |{s : s > threshold}|
  bool degenerate = false;        // ties made passing_count != target_count
};

// Largest threshold that lets the top ceil(pass_rate * n) scores pass under
// strict-greater gating: the (m+1)-th largest score, or -infinity when every
// score must pass. Ties pass together and are flagged as degenerate.
CalibrationResult calibrate_threshold(std::vector<double> scores, double pass_rate);

// Fraction of samples whose pre-score strictly exceeds th_pre.
double measure_pass_rate(const CascadePipeline& pipeline, const Dataset& data);

}  // namespace cascadeforge
