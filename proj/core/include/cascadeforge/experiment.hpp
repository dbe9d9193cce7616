#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cascadeforge/dataset.hpp"
#include "cascadeforge/training.hpp"

namespace cascadeforge {

struct CsvSourceConfig {
  std::string path;
  CsvSchema schema;
};

enum class FewshotMode { pre_only, both };

std::string to_string(FewshotMode mode);
FewshotMode fewshot_mode_from_string(const std::string& name);

// One experiment = one dataset, one split, one set of training knobs, and a
// protocol (compare / sweep / fewshot). Parsed from a JSON config file with
// fail-fast validation: unknown keys are errors. Every component seed is
// derived from the single master seed, so one --seed override re-seeds the
// whole experiment.
struct ExperimentConfig {
  std::optional<CsvSourceConfig> csv;
  std::optional<SyntheticSpec> synthetic;
  SplitRatios split_ratios{};
  std::uint64_t seed = 0;
  std::vector<Strategy> strategies{Strategy::independent, Strategy::sequential,
                                   Strategy::feedback};
  StrategyConfig strategy{};
  std::vector<double> pass_rate_sweep{};
  std::vector<double> fewshot_fractions{};
  FewshotMode fewshot_mode = FewshotMode::pre_only;
  std::string output_dir = "out";
  int threads = 1;

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text, const std::string& origin);
  // Resolved snapshot with all defaults materialized; parses back to an
  // equal config.
  std::string to_json_text() const;

  void validate() const;

  std::uint64_t generation_seed() const;
  std::uint64_t split_seed() const;
  std::uint64_t fewshot_seed() const;
  // strategy with the derived per-component seeds filled in.
  StrategyConfig resolved_strategy() const;
};

// Dataset acquisition honoring the configured source.
Dataset load_experiment_dataset(const ExperimentConfig& config);
SplitResult split_experiment_dataset(const ExperimentConfig& config, const Dataset& data);

// Command runners. Each writes its artifacts under config.output_dir and
// returns a process exit code (0 = every requested run completed).
int run_gen_data(const ExperimentConfig& config);
int run_train(const ExperimentConfig& config);
int run_evaluate(const ExperimentConfig& config, const std::string& pipeline_dir,
                 const std::string& split_name);
int run_compare(const ExperimentConfig& config);
int run_sweep_passrate(const ExperimentConfig& config);
int run_fewshot(const ExperimentConfig& config);

}  // namespace cascadeforge
