#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cascadeforge/dataset.hpp"

namespace cascadeforge {

struct FeaturizerConfig {
  // When set, per-document feature values are 0/1 presence instead of term
  // counts; the chi2 statistics aggregate presence counts accordingly.
  bool binary_counts = false;
};

// Lowercases and splits on every run of non-alphanumeric bytes (ASCII rules).
std::vector<std::string> tokenize(std::string_view text);

// Term counts of all unigrams plus adjacent bigrams joined with '_'.
using FeatureCounts = std::unordered_map<std::string, double>;
FeatureCounts extract_features(const std::vector<std::string>& tokens);

// Sparse non-negative vector sorted by strictly increasing index.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// Top-k feature table. Indices are contiguous, assigned in descending
// chi2-score order with lexicographic tie-break.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> features, std::vector<double> scores,
             std::size_t capacity);

  std::size_t size() const { return features_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::optional<std::uint32_t> index_of(const std::string& feature) const;
  const std::string& feature(std::uint32_t index) const { return features_[index]; }
  double score(std::uint32_t index) const { return scores_[index]; }

  // One line per feature: "feature<TAB>index<TAB>score".
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> features_;
  std::vector<double> scores_;
  std::size_t capacity_ = 0;
};

using Chi2Scores = std::unordered_map<std::string, double>;

// Chi-squared score per feature from per-class aggregated counts:
// score = sum_c (O_c - E_c)^2 / E_c with E_c = (sum_c O_c) * n_c / n.
// Throws when the dataset holds a single class.
Chi2Scores chi2_scores(const Dataset& data, const FeaturizerConfig& config = {});

// The k highest-scoring features (all of them when fewer exist).
Vocabulary select_top_k(const Chi2Scores& scores, std::size_t k);

// Term counts of in-vocabulary features; everything else dropped.
FeatureVector vectorize(std::string_view text, const Vocabulary& vocab,
                        const FeaturizerConfig& config = {});

std::vector<FeatureVector> vectorize_all(const Dataset& data, const Vocabulary& vocab,
                                         const FeaturizerConfig& config = {});

}  // namespace cascadeforge
