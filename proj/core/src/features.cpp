#include "cascadeforge/features.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cascadeforge {

namespace {

bool is_alnum_ascii(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char lower_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_alnum_ascii(c)) {
      current.push_back(lower_ascii(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

FeatureCounts extract_features(const std::vector<std::string>& tokens) {
  FeatureCounts counts;
  counts.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    counts[tokens[i]] += 1.0;
    if (i + 1 < tokens.size()) {
      counts[tokens[i] + "_" + tokens[i + 1]] += 1.0;
    }
  }
  return counts;
}

Vocabulary::Vocabulary(std::vector<std::string> features, std::vector<double> scores,
                       std::size_t capacity)
    : features_(std::move(features)), scores_(std::move(scores)), capacity_(capacity) {
  if (features_.size() != scores_.size()) {
    throw std::invalid_argument("Vocabulary: features and scores differ in length");
  }
  if (features_.size() > capacity_) {
    throw std::invalid_argument("Vocabulary: more features than capacity");
  }
  index_.reserve(features_.size());
  for (std::uint32_t i = 0; i < features_.size(); ++i) {
    auto [it, inserted] = index_.emplace(features_[i], i);
    if (!inserted) {
      throw std::invalid_argument("Vocabulary: duplicate feature '" + features_[i] + "'");
    }
  }
}

std::optional<std::uint32_t> Vocabulary::index_of(const std::string& feature) const {
  auto it = index_.find(feature);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("Vocabulary::save: cannot open '" + path + "'");
  out << "# vocabulary\t" << size() << '\t' << capacity_ << '\n';
  char buf[64];
  for (std::uint32_t i = 0; i < features_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", scores_[i]);
    out << features_[i] << '\t' << i << '\t' << buf << '\n';
  }
  if (!out) throw std::runtime_error("Vocabulary::save: write to '" + path + "' failed");
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("Vocabulary::load: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# vocabulary\t", 0) != 0) {
    throw std::runtime_error("Vocabulary::load: '" + path + "' has no vocabulary header");
  }
  std::size_t count = 0, capacity = 0;
  if (std::sscanf(line.c_str(), "# vocabulary\t%zu\t%zu", &count, &capacity) != 2) {
    throw std::runtime_error("Vocabulary::load: malformed header in '" + path + "'");
  }
  std::vector<std::string> features;
  std::vector<double> scores;
  features.reserve(count);
  scores.reserve(count);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw std::runtime_error("Vocabulary::load: '" + path + "' line " +
                               std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    std::string feature = line.substr(0, tab1);
    const auto index = std::stoul(line.substr(tab1 + 1, tab2 - tab1 - 1));
    if (index != features.size()) {
      throw std::runtime_error("Vocabulary::load: '" + path + "' line " +
                               std::to_string(line_no) + ": index out of order");
    }
    features.push_back(std::move(feature));
    scores.push_back(std::stod(line.substr(tab2 + 1)));
  }
  if (features.size() != count) {
    throw std::runtime_error("Vocabulary::load: '" + path + "' header promises " +
                             std::to_string(count) + " features, file has " +
                             std::to_string(features.size()));
  }
  return Vocabulary(std::move(features), std::move(scores), capacity);
}

Chi2Scores chi2_scores(const Dataset& data, const FeaturizerConfig& config) {
  const std::size_t n = data.size();
  const std::size_t n_pos = data.positives();
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("chi2_scores: dataset holds a single class");
  }

  // Observed per-class totals per feature; [0] negatives, [1] positives.
  struct ClassCounts { double neg = 0.0, pos = 0.0; };
  std::unordered_map<std::string, ClassCounts> observed;
  for (const Sample& s : data) {
    FeatureCounts counts = extract_features(tokenize(s.text));
    for (auto& [feature, value] : counts) {
      const double v = config.binary_counts ? 1.0 : value;
      auto& cell = observed[feature];
      if (s.label == 1) cell.pos += v;
      else cell.neg += v;
    }
  }

  const double frac_pos = static_cast<double>(n_pos) / static_cast<double>(n);
  const double frac_neg = static_cast<double>(n_neg) / static_cast<double>(n);
  Chi2Scores scores;
  scores.reserve(observed.size());
  for (const auto& [feature, cell] : observed) {
    const double total = cell.pos + cell.neg;
    const double e_pos = total * frac_pos;
    const double e_neg = total * frac_neg;
    const double d_pos = cell.pos - e_pos;
    const double d_neg = cell.neg - e_neg;
    scores[feature] = d_pos * d_pos / e_pos + d_neg * d_neg / e_neg;
  }
  return scores;
}

Vocabulary select_top_k(const Chi2Scores& scores, std::size_t k) {
  if (k == 0) throw std::invalid_argument("select_top_k: k must be positive");
  std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::size_t take = std::min(k, ranked.size());
  std::vector<std::string> features;
  std::vector<double> selected;
  features.reserve(take);
  selected.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    features.push_back(std::move(ranked[i].first));
    selected.push_back(ranked[i].second);
  }
  return Vocabulary(std::move(features), std::move(selected), take);
}

FeatureVector vectorize(std::string_view text, const Vocabulary& vocab,
                        const FeaturizerConfig& config) {
  FeatureCounts counts = extract_features(tokenize(text));
  FeatureVector vec;
  vec.entries.reserve(counts.size());
  for (const auto& [feature, value] : counts) {
    if (auto idx = vocab.index_of(feature)) {
      vec.entries.emplace_back(*idx, config.binary_counts ? 1.0 : value);
    }
  }
  std::sort(vec.entries.begin(), vec.entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return vec;
}

std::vector<FeatureVector> vectorize_all(const Dataset& data, const Vocabulary& vocab,
                                         const FeaturizerConfig& config) {
  std::vector<FeatureVector> out;
  out.reserve(data.size());
  for (const Sample& s : data) out.push_back(vectorize(s.text, vocab, config));
  return out;
}

}  // namespace cascadeforge
