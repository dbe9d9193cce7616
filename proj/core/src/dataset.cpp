#include "cascadeforge/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cascadeforge/features.hpp"
#include "cascadeforge/rng.hpp"

namespace cascadeforge {

Dataset::Dataset(std::vector<Sample> samples, std::string name)
    : samples_(std::move(samples)), name_(std::move(name)) {
  for (const Sample& s : samples_) {
    if (s.label != 0 && s.label != 1) {
      throw std::invalid_argument("Dataset: label must be 0 or 1 (sample id " +
                                  std::to_string(s.id) + ")");
    }
    positives_ += static_cast<std::size_t>(s.label);
  }
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples_.size());
  for (const Sample& s : samples_) out.push_back(s.label);
  return out;
}

namespace {

// RFC-4180 style records: comma separated, fields optionally double-quoted,
// embedded quotes doubled, quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        break;
      case '\r':
        break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        break;
      default:
        field.push_back(c);
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quoted field");
  if (any && (!field.empty() || !row.empty())) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string quote_csv_field(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::size_t column_index(const std::vector<std::string>& header,
                         const std::string& name, const std::string& path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw std::runtime_error(path + ": header has no column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");
  auto rows = parse_csv(in);
  if (rows.empty()) {
    throw std::runtime_error(path + ": empty file, expected a header row");
  }
  const auto& header = rows.front();
  const std::size_t label_col = column_index(header, schema.label_column, path);
  const std::size_t text_col = column_index(header, schema.text_column, path);

  std::vector<Sample> samples;
  samples.reserve(rows.size() - 1);
  std::int64_t next_id = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    // Rows are named by 1-based position in the file, header included.
    const std::string where = path + ": row " + std::to_string(r + 1);
    if (row.size() != header.size()) {
      throw std::runtime_error(where + ": expected " + std::to_string(header.size()) +
                               " fields, found " + std::to_string(row.size()));
    }
    const std::string& label_text = row[label_col];
    int label;
    if (label_text == "0") label = 0;
    else if (label_text == "1") label = 1;
    else throw std::runtime_error(where + ": label '" + label_text + "' is not 0 or 1");

    const std::string& text = row[text_col];
    if (schema.min_tokens > 0 &&
        tokenize(text).size() < static_cast<std::size_t>(schema.min_tokens)) {
      continue;
    }
    samples.push_back(Sample{next_id++, text, label});
  }
  return Dataset(std::move(samples), path);
}

void save_csv(const Dataset& data, const std::string& path, const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_csv: cannot open '" + path + "' for writing");
  out << quote_csv_field(schema.label_column) << ','
      << quote_csv_field(schema.text_column) << '\n';
  for (const Sample& s : data) {
    out << s.label << ',' << quote_csv_field(s.text) << '\n';
  }
  if (!out) throw std::runtime_error("save_csv: write to '" + path + "' failed");
}

namespace {

// Largest-remainder rounding of n * share_i to integers summing to n.
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& shares) {
  std::vector<std::size_t> counts(shares.size());
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    double exact = static_cast<double>(n) * shares[i];
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    rema.emplace_back(exact - std::floor(exact), i);
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
    counts[rema[k % rema.size()].second] += 1;
  }
  return counts;
}

}  // namespace

SplitResult split(const Dataset& data, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0.0) || !(ratios.val > 0.0) || !(ratios.test > 0.0)) {
    throw std::invalid_argument("split: each ratio must be positive");
  }
  const double total = ratios.train + ratios.val + ratios.test;
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("split: ratios must sum to 1");
  }
  const std::size_t n = data.size();
  if (n < 3) throw std::invalid_argument("split: dataset has fewer than 3 samples");

  const std::vector<double> shares{ratios.train, ratios.val, ratios.test};
  const std::vector<std::size_t> sizes = apportion(n, shares);
  for (std::size_t s : sizes) {
    if (s == 0) throw std::invalid_argument("split: a split would be empty");
  }

  // Per-class index pools, shuffled.
  std::array<std::vector<std::size_t>, 2> pool;
  for (std::size_t i = 0; i < n; ++i) pool[data[i].label].push_back(i);
  Rng rng(seed);
  rng.shuffle(pool[1]);
  rng.shuffle(pool[0]);

  // Integer apportionment of the class-by-split matrix preserving both the
  // class totals and the split totals.
  std::array<std::array<std::size_t, 3>, 2> quota{};
  std::array<std::size_t, 3> col_used{};
  std::size_t leftover = 0;
  std::vector<std::pair<double, std::pair<int, int>>> cells;
  for (int c = 0; c < 2; ++c) {
    std::size_t row_used = 0;
    for (int s = 0; s < 3; ++s) {
      double exact = static_cast<double>(pool[c].size()) *
                     static_cast<double>(sizes[s]) / static_cast<double>(n);
      quota[c][s] = static_cast<std::size_t>(std::floor(exact));
      row_used += quota[c][s];
      col_used[s] += quota[c][s];
      cells.emplace_back(exact - std::floor(exact), std::make_pair(c, s));
    }
    leftover += pool[c].size() - row_used;
  }
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::array<std::size_t, 2> row_need;
  for (int c = 0; c < 2; ++c) {
    row_need[c] = pool[c].size() - quota[c][0] - quota[c][1] - quota[c][2];
  }
  while (leftover > 0) {
    bool advanced = false;
    for (const auto& [frac, cell] : cells) {
      const auto [c, s] = cell;
      if (row_need[c] == 0 || col_used[s] >= sizes[s]) continue;
      quota[c][s] += 1;
      col_used[s] += 1;
      row_need[c] -= 1;
      leftover -= 1;
      advanced = true;
      break;
    }
    if (!advanced) throw std::logic_error("split: apportionment failed to converge");
  }

  std::array<std::vector<std::size_t>, 3> chosen;
  for (int c = 1; c >= 0; --c) {
    std::size_t offset = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < quota[c][s]; ++k) {
        chosen[s].push_back(pool[c][offset + k]);
      }
      offset += quota[c][s];
    }
  }

  const std::array<std::string, 3> suffix{"/train", "/val", "/test"};
  std::array<Dataset, 3> out;
  for (int s = 0; s < 3; ++s) {
    std::sort(chosen[s].begin(), chosen[s].end());
    std::vector<Sample> samples;
    samples.reserve(chosen[s].size());
    for (std::size_t i : chosen[s]) samples.push_back(data[i]);
    out[s] = Dataset(std::move(samples), data.name() + suffix[s]);
  }
  return SplitResult{std::move(out[0]), std::move(out[1]), std::move(out[2])};
}

Dataset subsample(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("subsample: fraction must lie in (0, 1]");
  }
  const std::size_t n = data.size();
  const auto target = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  if (target < 2) {
    throw std::invalid_argument("subsample: fraction keeps fewer than 2 samples");
  }

  std::array<std::vector<std::size_t>, 2> pool;
  for (std::size_t i = 0; i < n; ++i) pool[data[i].label].push_back(i);

  // Per-class counts by largest remainder against the overall target.
  std::array<std::size_t, 2> take{};
  {
    std::array<double, 2> exact;
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
      exact[c] = static_cast<double>(pool[c].size()) * static_cast<double>(target) /
                 static_cast<double>(n);
      take[c] = static_cast<std::size_t>(std::floor(exact[c]));
      assigned += take[c];
    }
    // Positive class wins remainder ties.
    while (assigned < target) {
      int pick = (exact[1] - std::floor(exact[1])) >= (exact[0] - std::floor(exact[0])) ? 1 : 0;
      if (take[pick] >= pool[pick].size()) pick = 1 - pick;
      take[pick] += 1;
      exact[pick] = std::floor(exact[pick]);  // consumed its remainder
      assigned += 1;
    }
  }
  if (take[0] == 0 || take[1] == 0) {
    throw std::invalid_argument("subsample: fraction " + std::to_string(fraction) +
                                " leaves a class empty");
  }

  Rng rng(seed);
  rng.shuffle(pool[1]);
  rng.shuffle(pool[0]);
  std::vector<std::size_t> keep;
  keep.reserve(target);
  for (int c : {1, 0}) {
    keep.insert(keep.end(), pool[c].begin(), pool[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  std::sort(keep.begin(), keep.end());

  std::vector<Sample> samples;
  samples.reserve(keep.size());
  for (std::size_t i : keep) samples.push_back(data[i]);
  return Dataset(std::move(samples), data.name() + "/sub");
}

void SyntheticSpec::validate() const {
  if (n_samples < 10) throw std::invalid_argument("SyntheticSpec: n_samples must be >= 10");
  if (dim_shared < 1) throw std::invalid_argument("SyntheticSpec: dim_shared must be >= 1");
  if (dim_main_only < 0) throw std::invalid_argument("SyntheticSpec: dim_main_only must be >= 0");
  if (!(positive_fraction > 0.0 && positive_fraction < 1.0)) {
    throw std::invalid_argument("SyntheticSpec: positive_fraction must lie in (0, 1)");
  }
  if (!(hard_negative_fraction >= 0.0 && hard_negative_fraction < 1.0)) {
    throw std::invalid_argument("SyntheticSpec: hard_negative_fraction must lie in [0, 1)");
  }
  if (!(cluster_separation > 0.0)) {
    throw std::invalid_argument("SyntheticSpec: cluster_separation must be positive");
  }
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("SyntheticSpec: noise_sigma must be >= 0");
  }
}

namespace {

std::string bucket_token(int dim, double value, double width) {
  const auto bucket = static_cast<long long>(std::llround(value / width));
  // Alphanumeric-only so the token survives tokenization intact.
  std::string out = "f" + std::to_string(dim) + "b";
  if (bucket < 0) {
    out += "m" + std::to_string(-bucket);
  } else {
    out += "p" + std::to_string(bucket);
  }
  return out;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n_samples);
  const auto n_pos = static_cast<std::size_t>(
      std::llround(spec.positive_fraction * static_cast<double>(spec.n_samples)));
  const std::size_t n_neg = n - n_pos;
  const auto n_hard = static_cast<std::size_t>(
      std::llround(spec.hard_negative_fraction * static_cast<double>(n_neg)));

  // Per-coordinate center offset; the subspace centers end up exactly
  // cluster_separation apart in Euclidean distance.
  const double delta_shared =
      spec.cluster_separation / (2.0 * std::sqrt(static_cast<double>(spec.dim_shared)));
  const double delta_main =
      spec.dim_main_only > 0
          ? spec.cluster_separation / (2.0 * std::sqrt(static_cast<double>(spec.dim_main_only)))
          : 0.0;
  // Bucket width scales with the noise so cells stay populated; the floor
  // keeps the noiseless case discretizable.
  const double width = std::max(spec.noise_sigma, spec.cluster_separation / 16.0);

  // Kind per index: positives first, then hard negatives, then easy ones.
  // The final sample order is shuffled.
  std::vector<int> kind(n, 2);
  for (std::size_t i = 0; i < n_pos; ++i) kind[i] = 0;
  for (std::size_t i = n_pos; i < n_pos + n_hard; ++i) kind[i] = 1;
  Rng rng(seed);
  rng.shuffle(kind);

  std::vector<Sample> samples;
  samples.reserve(n);
  const int dims = spec.dim_shared + spec.dim_main_only;
  for (std::size_t i = 0; i < n; ++i) {
    const int k = kind[i];
    const int label = k == 0 ? 1 : 0;
    std::string text;
    text.reserve(static_cast<std::size_t>(dims) * 8);
    for (int d = 0; d < dims; ++d) {
      const bool shared = d < spec.dim_shared;
      double center;
      if (shared) {
        // Positives and hard negatives coincide here.
        center = (k == 2) ? -delta_shared : +delta_shared;
      } else {
        // Only positives sit on the high side here.
        center = (k == 0) ? +delta_main : -delta_main;
      }
      const double value = center + spec.noise_sigma * rng.gaussian();
      if (d > 0) text.push_back(' ');
      text += bucket_token(d, value, width);
    }
    samples.push_back(Sample{static_cast<std::int64_t>(i), std::move(text), label});
  }
  return Dataset(std::move(samples), "synthetic");
}

}  // namespace cascadeforge
