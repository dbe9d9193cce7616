#include "cascadeforge/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cascadeforge {

void WeightParams::validate() const {
  if (!(t_pos >= kMinTemperature) || !(t_neg >= kMinTemperature)) {
    throw std::invalid_argument("WeightParams: temperatures must be >= " +
                                std::to_string(kMinTemperature));
  }
  if (!(a_pos > 0.0) || !(a_neg > 0.0)) {
    throw std::invalid_argument("WeightParams: attention intensities must be positive");
  }
  if (!(w_neg_min >= 0.0)) {
    throw std::invalid_argument("WeightParams: w_neg_min must be >= 0");
  }
  if (!(w_max > 0.0) || w_max < w_neg_min) {
    throw std::invalid_argument("WeightParams: w_max must be positive and >= w_neg_min");
  }
}

WeightParams WeightParams::uniform() {
  WeightParams p;
  p.t_pos = kFlatTemperature;
  p.t_neg = kFlatTemperature;
  p.a_pos = 2.0;
  p.a_neg = 1.0;
  p.w_neg_min = 0.5;
  p.w_max = 1.0;
  return p;
}

double sigma(double z, double t, double a) {
  if (!(t > 0.0)) throw std::invalid_argument("sigma: temperature must be positive");
  const double x = z / t;
  // Evaluate through exp of a non-positive argument only.
  if (x >= 0.0) {
    return a / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return a * e / (1.0 + e);
}

double sample_weight(double main_score, int label, const WeightParams& params) {
  params.validate();
  if (!(main_score >= 0.0 && main_score <= 1.0)) {
    throw std::invalid_argument("sample_weight: main_score must lie in [0, 1]");
  }
  if (label != 0 && label != 1) {
    throw std::invalid_argument("sample_weight: label must be 0 or 1");
  }
  const double z = main_score - 0.5;
  if (label == 1) {
    return std::min(sigma(z, params.t_pos, params.a_pos), params.w_max);
  }
  return std::min(params.w_neg_min + sigma(z, params.t_neg, params.a_neg), params.w_max);
}

SampleWeights compute_weights(std::span<const ScoredSample> scored,
                              const WeightParams& params) {
  SampleWeights weights;
  weights.reserve(scored.size());
  for (const ScoredSample& s : scored) {
    weights.push_back(sample_weight(s.main_score, s.label, params));
  }
  return weights;
}

}  // namespace cascadeforge
