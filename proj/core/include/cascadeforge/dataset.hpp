#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cascadeforge {

struct Sample {
  std::int64_t id = 0;
  std::string text;
  int label = 0;  // 0 or 1
};

// Ordered, immutable collection of labeled samples.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Sample> samples, std::string name);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const { return samples_; }
  const std::string& name() const { return name_; }

  std::size_t positives() const { return positives_; }
  std::size_t negatives() const { return samples_.size() - positives_; }
  std::vector<int> labels() const;

  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

 private:
  std::vector<Sample> samples_;
  std::string name_;
  std::size_t positives_ = 0;
};

struct CsvSchema {
  std::string label_column = "label";
  std::string text_column = "text";
  // Rows whose text has fewer tokens than this are dropped (0 keeps all).
  int min_tokens = 0;
};

// Reads a comma-separated file with a header row and double-quote escaping.
// Sample ids are assigned 0..n-1 in file order. Errors name the offending row.
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});

// Writes the dataset in the same schema load_csv reads.
void save_csv(const Dataset& data, const std::string& path,
              const CsvSchema& schema = {});

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct SplitResult {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Stratified three-way split. The partition is exhaustive, disjoint, and a
// pure function of (data, ratios, seed). Split sizes follow the ratios by
// largest remainder; throws when any split would be empty.
SplitResult split(const Dataset& data, const SplitRatios& ratios, std::uint64_t seed);

// Stratified subsample of round(fraction * n) samples, original order
// preserved. Throws when either class would come out empty.
Dataset subsample(const Dataset& data, double fraction, std::uint64_t seed);

// Synthetic corpus of pseudo-text samples. Coordinates are drawn from
// Gaussian clusters and discretized into tokens, one token per coordinate.
// Positives and hard negatives share a center in the shared subspace and are
// cluster_separation apart (Euclidean, within the subspace) in the main-only
// subspace; easy negatives are cluster_separation away from positives in
// both subspaces.
struct SyntheticSpec {
  int n_samples = 5000;
  int dim_shared = 4;       // coordinates visible to both stages
  int dim_main_only = 6;    // coordinates that only a large budget resolves
  double positive_fraction = 0.40;
  double hard_negative_fraction = 0.25;  // fraction of negatives that are hard
  double cluster_separation = 2.6;
  double noise_sigma = 1.4;

  void validate() const;  // throws std::invalid_argument
};

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace cascadeforge
