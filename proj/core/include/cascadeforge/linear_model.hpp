#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cascadeforge/features.hpp"
#include "cascadeforge/weighting.hpp"

namespace cascadeforge {

// Logistic regression over sparse feature vectors. Weight length is the
// vocabulary capacity the model was trained against.
struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t dim() const { return weights.size(); }

  // sigmoid(weights . v + bias); throws when v holds an out-of-range index.
  double score(const FeatureVector& v) const;

  // Text format: magic header, dimension, bias, one weight per line.
  void save(const std::string& path) const;
  static LogisticModel load(const std::string& path);
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 50;
  double l2 = 1e-4;
  int batch_size = 64;
  bool class_balanced = false;
  std::uint64_t seed = 0;

  void validate() const;
};

// (weight_pos, weight_neg) = n / (2 * n_c). Throws on single-class input.
std::pair<double, double> balanced_class_weights(std::span<const int> labels);

// Mean weighted cross-entropy plus (l2/2) * ||model.weights||^2 (bias
// excluded). Predictions are clamped to [1e-12, 1 - 1e-12].
double loss(const LogisticModel& model, std::span<const FeatureVector> vectors,
            std::span<const int> labels, std::span<const double> sample_weights,
            double l2);

struct LossGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

// Analytic gradient of loss (exposed for testing against finite differences).
LossGradient gradient(const LogisticModel& model, std::span<const FeatureVector> vectors,
                      std::span<const int> labels, std::span<const double> sample_weights,
                      double l2);

// Mini-batch gradient descent from zero initialization; sample order is
// reshuffled every epoch from config.seed. With class_balanced set, the
// effective per-sample weight is the provided weight times the balanced
// class weight. Deterministic for a fixed seed. The optional observer runs
// after every epoch with the current parameters.
LogisticModel train(std::span<const FeatureVector> vectors, std::span<const int> labels,
                    const SampleWeights& sample_weights, std::size_t dim,
                    const TrainConfig& config,
                    const std::function<void(int, const LogisticModel&)>& on_epoch = {});

}  // namespace cascadeforge
