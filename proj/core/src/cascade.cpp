#include "cascadeforge/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "cascadeforge/dataset.hpp"

namespace cascadeforge {

LinearTextScorer::LinearTextScorer(LogisticModel model, Vocabulary vocab,
                                   FeaturizerConfig config)
    : model_(std::move(model)), vocab_(std::move(vocab)), config_(config) {
  if (model_.dim() != vocab_.capacity()) {
    throw std::invalid_argument("LinearTextScorer: model dimension " +
                                std::to_string(model_.dim()) +
                                " does not match vocabulary capacity " +
                                std::to_string(vocab_.capacity()));
  }
}

double LinearTextScorer::score(std::string_view text) const {
  return model_.score(vectorize(text, vocab_, config_));
}

CascadePipeline::CascadePipeline(std::shared_ptr<const Scorer> pre,
                                 std::shared_ptr<const Scorer> main, double th_pre,
                                 double th_main)
    : pre_(std::move(pre)), main_(std::move(main)), th_pre_(th_pre), th_main_(th_main) {
  if (!pre_ || !main_) throw std::invalid_argument("CascadePipeline: null scorer");
  if (std::isnan(th_pre_) || std::isnan(th_main_)) {
    throw std::invalid_argument("CascadePipeline: NaN threshold");
  }
}

PipelinePrediction CascadePipeline::infer(std::string_view text) const {
  PipelinePrediction out;
  out.pre_score = pre_->score(text);
  out.passed_pre = out.pre_score > th_pre_;
  out.main_called = out.passed_pre;
  if (out.passed_pre) {
    const double ms = main_->score(text);
    out.main_score = ms;
    out.final_label = ms > th_main_ ? 1 : 0;
  }
  return out;
}

namespace {

const char* kManifestName = "manifest.txt";

std::string threshold_text(double th) {
  if (std::isinf(th)) return th < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", th);
  return buf;
}

double parse_threshold(const std::string& text) {
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  return std::stod(text);
}

}  // namespace

void CascadePipeline::save(const std::string& dir) const {
  const auto* pre = dynamic_cast<const LinearTextScorer*>(pre_.get());
  const auto* main = dynamic_cast<const LinearTextScorer*>(main_.get());
  if (!pre || !main) {
    throw std::runtime_error("CascadePipeline::save: only linear text stages are serializable");
  }
  std::filesystem::create_directories(dir);
  const std::filesystem::path root(dir);
  pre->model().save((root / "pre_model.txt").string());
  pre->vocabulary().save((root / "pre_vocab.tsv").string());
  main->model().save((root / "main_model.txt").string());
  main->vocabulary().save((root / "main_vocab.tsv").string());

  std::ofstream out(root / kManifestName, std::ios::binary);
  if (!out) throw std::runtime_error("CascadePipeline::save: cannot write manifest in '" + dir + "'");
  out << "# cascade-pipeline v1\n";
  out << "th_pre " << threshold_text(th_pre_) << '\n';
  out << "th_main " << threshold_text(th_main_) << '\n';
  out << "pre_binary_counts " << (pre->featurizer().binary_counts ? 1 : 0) << '\n';
  out << "main_binary_counts " << (main->featurizer().binary_counts ? 1 : 0) << '\n';
  if (!out) throw std::runtime_error("CascadePipeline::save: manifest write failed in '" + dir + "'");
}

CascadePipeline CascadePipeline::load(const std::string& dir) {
  const std::filesystem::path root(dir);
  std::ifstream in(root / kManifestName, std::ios::binary);
  if (!in) throw std::runtime_error("CascadePipeline::load: no manifest in '" + dir + "'");
  std::string line;
  if (!std::getline(in, line) || line != "# cascade-pipeline v1") {
    throw std::runtime_error("CascadePipeline::load: unrecognized manifest header in '" + dir + "'");
  }
  double th_pre = 0.0, th_main = 0.5;
  FeaturizerConfig pre_cfg, main_cfg;
  bool saw_pre = false, saw_main = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos) {
      throw std::runtime_error("CascadePipeline::load: malformed manifest line '" + line + "'");
    }
    const std::string key = line.substr(0, space);
    const std::string value = line.substr(space + 1);
    if (key == "th_pre") {
      th_pre = parse_threshold(value);
      saw_pre = true;
    } else if (key == "th_main") {
      th_main = parse_threshold(value);
      saw_main = true;
    } else if (key == "pre_binary_counts") {
      pre_cfg.binary_counts = value == "1";
    } else if (key == "main_binary_counts") {
      main_cfg.binary_counts = value == "1";
    } else {
      throw std::runtime_error("CascadePipeline::load: unknown manifest key '" + key + "'");
    }
  }
  if (!saw_pre || !saw_main) {
    throw std::runtime_error("CascadePipeline::load: manifest in '" + dir + "' lacks thresholds");
  }
  auto pre = std::make_shared<LinearTextScorer>(
      LogisticModel::load((root / "pre_model.txt").string()),
      Vocabulary::load((root / "pre_vocab.tsv").string()), pre_cfg);
  auto main = std::make_shared<LinearTextScorer>(
      LogisticModel::load((root / "main_model.txt").string()),
      Vocabulary::load((root / "main_vocab.tsv").string()), main_cfg);
  return CascadePipeline(std::move(pre), std::move(main), th_pre, th_main);
}

CalibrationResult calibrate_threshold(std::vector<double> scores, double pass_rate) {
  if (scores.empty()) throw std::invalid_argument("calibrate_threshold: empty scores");
  if (!(pass_rate > 0.0 && pass_rate <= 1.0)) {
    throw std::invalid_argument("calibrate_threshold: pass_rate must lie in (0, 1]");
  }
  const std::size_t n = scores.size();
  // Guard against pass_rate * n landing a hair above an exact integer.
  const auto target = static_cast<std::size_t>(
      std::ceil(pass_rate * static_cast<double>(n) - 1e-9));

  CalibrationResult result;
  result.target_count = std::max<std::size_t>(target, 1);
  std::sort(scores.begin(), scores.end(), std::greater<>());
  if (result.target_count >= n) {
    result.target_count = n;
    result.threshold = -std::numeric_limits<double>::infinity();
  } else {
    result.threshold = scores[result.target_count];
  }
  result.passing_count = static_cast<std::size_t>(
      std::count_if(scores.begin(), scores.end(),
                    [&](double s) { return s > result.threshold; }));
  result.degenerate = result.passing_count != result.target_count;
  return result;
}

double measure_pass_rate(const CascadePipeline& pipeline, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("measure_pass_rate: empty dataset");
  std::size_t passed = 0;
  for (const Sample& s : data) {
    if (pipeline.infer(s.text).passed_pre) ++passed;
  }
  return static_cast<double>(passed) / static_cast<double>(data.size());
}

}  // namespace cascadeforge
