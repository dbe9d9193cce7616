#pragma once

#include <span>
#include <vector>

namespace cascadeforge {

using SampleWeights = std::vector<double>;

// Parameters of the feedback sample-weighting curve. A positive sample is
// weighted min(sigma(s - 0.5, t_pos, a_pos), w_max); a negative sample
// min(w_neg_min + sigma(s - 0.5, t_neg, a_neg), w_max), where s is the
// main-stage score of the sample.
struct WeightParams {
  double t_pos = 0.1;
  double t_neg = 0.1;
  double a_pos = 2.0;
  double a_neg = 1.0;
  double w_neg_min = 0.0;
  double w_max = 5.0;

  // Temperatures below this blow the curve up numerically; rejected.
  static constexpr double kMinTemperature = 1e-3;
  // Large enough that exp(-z/t) evaluates to exactly 1.0 for |z| <= 0.5,
  // making the curve exactly flat at a/2.
  static constexpr double kFlatTemperature = 1e30;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;

  // Flat curve: every weight evaluates to exactly 1.0 regardless of score.
  static WeightParams uniform();
};

// Scaled logistic a / (1 + exp(-z / t)). Saturates without overflow for
// large |z / t|. Throws when t <= 0.
double sigma(double z, double t, double a);

// Weight of one sample given its main-stage score in [0, 1] and its label.
double sample_weight(double main_score, int label, const WeightParams& params);

struct ScoredSample {
  double main_score = 0.0;
  int label = 0;
};

// Elementwise sample_weight over a batch.
SampleWeights compute_weights(std::span<const ScoredSample> scored,
                              const WeightParams& params);

}  // namespace cascadeforge
