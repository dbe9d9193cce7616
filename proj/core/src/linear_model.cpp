#include "cascadeforge/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "cascadeforge/rng.hpp"

namespace cascadeforge {

namespace {

constexpr double kProbEps = 1e-12;

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(const std::vector<double>& weights, const FeatureVector& v) {
  double z = 0.0;
  for (const auto& [idx, value] : v.entries) {
    if (idx >= weights.size()) {
      throw std::out_of_range("LogisticModel: feature index " + std::to_string(idx) +
                              " out of range for dimension " +
                              std::to_string(weights.size()));
    }
    z += weights[idx] * value;
  }
  return z;
}

void check_shapes(std::span<const FeatureVector> vectors, std::span<const int> labels,
                  std::span<const double> sample_weights) {
  if (vectors.size() != labels.size() || vectors.size() != sample_weights.size()) {
    throw std::invalid_argument("linear_model: vectors, labels and weights differ in length");
  }
  for (double w : sample_weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("linear_model: sample weights must be finite and >= 0");
    }
  }
}

}  // namespace

double LogisticModel::score(const FeatureVector& v) const {
  return stable_sigmoid(dot(weights, v) + bias);
}

void LogisticModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("LogisticModel::save: cannot open '" + path + "'");
  char buf[64];
  out << "# logistic-model v1\n";
  out << "dim " << weights.size() << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", bias);
  out << "bias " << buf << '\n';
  for (double w : weights) {
    std::snprintf(buf, sizeof buf, "%.17g", w);
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("LogisticModel::save: write to '" + path + "' failed");
}

LogisticModel LogisticModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("LogisticModel::load: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "# logistic-model v1") {
    throw std::runtime_error("LogisticModel::load: '" + path + "' has no model header");
  }
  std::size_t dim = 0;
  double bias = 0.0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "dim %zu", &dim) != 1) {
    throw std::runtime_error("LogisticModel::load: malformed dimension in '" + path + "'");
  }
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "bias %lg", &bias) != 1) {
    throw std::runtime_error("LogisticModel::load: malformed bias in '" + path + "'");
  }
  LogisticModel model;
  model.bias = bias;
  model.weights.reserve(dim);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    model.weights.push_back(std::stod(line));
  }
  if (model.weights.size() != dim) {
    throw std::runtime_error("LogisticModel::load: '" + path + "' promises " +
                             std::to_string(dim) + " weights, file has " +
                             std::to_string(model.weights.size()));
  }
  return model;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (!(l2 >= 0.0)) throw std::invalid_argument("TrainConfig: l2 must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
}

std::pair<double, double> balanced_class_weights(std::span<const int> labels) {
  std::size_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("balanced_class_weights: labels must be 0/1");
    n_pos += static_cast<std::size_t>(y);
  }
  const std::size_t n = labels.size();
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("balanced_class_weights: both classes must be present");
  }
  const double dn = static_cast<double>(n);
  return {dn / (2.0 * static_cast<double>(n_pos)), dn / (2.0 * static_cast<double>(n_neg))};
}

double loss(const LogisticModel& model, std::span<const FeatureVector> vectors,
            std::span<const int> labels, std::span<const double> sample_weights,
            double l2) {
  check_shapes(vectors, labels, sample_weights);
  const std::size_t n = vectors.size();
  double ce = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::clamp(model.score(vectors[i]), kProbEps, 1.0 - kProbEps);
    const double y = static_cast<double>(labels[i]);
    ce += sample_weights[i] * -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  double total = n > 0 ? ce / static_cast<double>(n) : 0.0;
  if (l2 > 0.0) {
    double sq = 0.0;
    for (double w : model.weights) sq += w * w;
    total += 0.5 * l2 * sq;
  }
  return total;
}

LossGradient gradient(const LogisticModel& model, std::span<const FeatureVector> vectors,
                      std::span<const int> labels, std::span<const double> sample_weights,
                      double l2) {
  check_shapes(vectors, labels, sample_weights);
  const std::size_t n = vectors.size();
  LossGradient g;
  g.weights.assign(model.weights.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = model.score(vectors[i]);
    const double residual = sample_weights[i] * (p - static_cast<double>(labels[i]));
    for (const auto& [idx, value] : vectors[i].entries) {
      g.weights[idx] += residual * value;
    }
    g.bias += residual;
  }
  if (n > 0) {
    const double inv = 1.0 / static_cast<double>(n);
    for (double& w : g.weights) w *= inv;
    g.bias *= inv;
  }
  if (l2 > 0.0) {
    for (std::size_t d = 0; d < g.weights.size(); ++d) g.weights[d] += l2 * model.weights[d];
  }
  return g;
}

LogisticModel train(std::span<const FeatureVector> vectors, std::span<const int> labels,
                    const SampleWeights& sample_weights, std::size_t dim,
                    const TrainConfig& config,
                    const std::function<void(int, const LogisticModel&)>& on_epoch) {
  config.validate();
  check_shapes(vectors, labels, sample_weights);
  const std::size_t n = vectors.size();
  if (n < 2) throw std::invalid_argument("train: need at least 2 samples");
  for (const FeatureVector& v : vectors) {
    for (const auto& [idx, value] : v.entries) {
      (void)value;
      if (idx >= dim) {
        throw std::invalid_argument("train: feature index " + std::to_string(idx) +
                                    " out of range for dimension " + std::to_string(dim));
      }
    }
  }

  std::vector<double> effective(sample_weights.begin(), sample_weights.end());
  if (config.class_balanced) {
    const auto [w_pos, w_neg] = balanced_class_weights(labels);
    for (std::size_t i = 0; i < n; ++i) effective[i] *= labels[i] == 1 ? w_pos : w_neg;
  } else {
    bool seen[2] = {false, false};
    for (int y : labels) seen[y] = true;
    if (!seen[0] || !seen[1]) throw std::invalid_argument("train: both classes must be present");
  }

  LogisticModel model;
  model.weights.assign(dim, 0.0);

  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(dim, 0.0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      double grad_bias = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const double p = model.score(vectors[i]);
        const double residual = effective[i] * (p - static_cast<double>(labels[i]));
        for (const auto& [idx, value] : vectors[i].entries) grad[idx] += residual * value;
        grad_bias += residual;
      }
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      for (std::size_t d = 0; d < dim; ++d) {
        model.weights[d] -= config.learning_rate * (grad[d] * inv_batch + config.l2 * model.weights[d]);
        grad[d] = 0.0;
      }
      model.bias -= config.learning_rate * (grad_bias * inv_batch);
    }
    if (!std::isfinite(model.bias) ||
        std::any_of(model.weights.begin(), model.weights.end(),
                    [](double w) { return !std::isfinite(w); })) {
      throw std::runtime_error("train: parameters diverged to non-finite values at epoch " +
                               std::to_string(epoch));
    }
    if (on_epoch) on_epoch(epoch, model);
  }
  return model;
}

}  // namespace cascadeforge
