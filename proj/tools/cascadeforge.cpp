#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "cascadeforge/experiment.hpp"

namespace {

using cascadeforge::ExperimentConfig;
using cascadeforge::SyntheticSpec;

// Options shared by every subcommand; presence decides config overrides.
struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  CLI::Option* config_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void attach(CLI::App* sub, bool config_required) {
    config_opt = sub->add_option("--config", config, "Experiment config file (JSON)")
                     ->check(CLI::ExistingFile);
    if (config_required) config_opt->required();
    out_opt = sub->add_option("--out", out, "Output directory (overrides config output_dir)");
    seed_opt = sub->add_option("--seed", seed, "Master seed (overrides config seed)");
    threads_opt =
        sub->add_option("--threads", threads, "Worker threads (overrides config threads)")
            ->check(CLI::PositiveNumber);
  }

  ExperimentConfig build() const {
    ExperimentConfig cfg;
    if (config_opt->count()) {
      cfg = ExperimentConfig::from_json_file(config);
    } else {
      cfg.synthetic = SyntheticSpec{};
    }
    if (out_opt->count()) cfg.output_dir = out;
    if (seed_opt->count()) cfg.seed = seed;
    if (threads_opt->count()) cfg.threads = threads;
    cfg.validate();
    return cfg;
  }
};

// gen-data flag overrides on top of the configured (or default) spec.
struct GenArgs {
  int n = 0, dim_shared = 0, dim_main_only = 0;
  double positive_fraction = 0, hard_negative_fraction = 0, cluster_separation = 0,
         noise_sigma = 0;
  CLI::Option *n_opt = nullptr, *shared_opt = nullptr, *main_opt = nullptr, *pos_opt = nullptr,
              *hard_opt = nullptr, *sep_opt = nullptr, *noise_opt = nullptr;

  void attach(CLI::App* sub) {
    n_opt = sub->add_option("--n", n, "Sample count");
    shared_opt = sub->add_option("--dim-shared", dim_shared, "Dimensions visible to both stages");
    main_opt = sub->add_option("--dim-main-only", dim_main_only,
                               "Dimensions separating positives from hard negatives");
    pos_opt = sub->add_option("--positive-fraction", positive_fraction, "Positive class share");
    hard_opt = sub->add_option("--hard-negative-fraction", hard_negative_fraction,
                               "Share of negatives that mimic positives");
    sep_opt = sub->add_option("--cluster-separation", cluster_separation,
                              "Distance between cluster centers");
    noise_opt = sub->add_option("--noise-sigma", noise_sigma, "Coordinate noise level");
  }

  void apply(ExperimentConfig& cfg) const {
    if (!cfg.synthetic) cfg.synthetic = SyntheticSpec{};
    SyntheticSpec& s = *cfg.synthetic;
    if (n_opt->count()) s.n_samples = n;
    if (shared_opt->count()) s.dim_shared = dim_shared;
    if (main_opt->count()) s.dim_main_only = dim_main_only;
    if (pos_opt->count()) s.positive_fraction = positive_fraction;
    if (hard_opt->count()) s.hard_negative_fraction = hard_negative_fraction;
    if (sep_opt->count()) s.cluster_separation = cluster_separation;
    if (noise_opt->count()) s.noise_sigma = noise_sigma;
    s.validate();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage cascade training, comparison and evaluation workbench"};
  app.require_subcommand(1);
  int exit_code = 0;

  Common gen_common, train_common, eval_common, compare_common, sweep_common, fewshot_common;
  GenArgs gen_args;
  std::string pipeline_dir;
  std::string split_name = "test";

  CLI::App* gen = app.add_subcommand("gen-data", "Generate the synthetic corpus as CSV");
  gen_common.attach(gen, false);
  gen_args.attach(gen);
  gen->callback([&] {
    ExperimentConfig cfg = gen_common.build();
    gen_args.apply(cfg);
    exit_code = run_gen_data(cfg);
  });

  CLI::App* train = app.add_subcommand("train", "Train the configured strategies and save pipelines");
  train_common.attach(train, true);
  train->callback([&] { exit_code = run_train(train_common.build()); });

  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a saved pipeline on one split");
  eval_common.attach(evaluate, true);
  evaluate->add_option("--pipeline", pipeline_dir, "Saved pipeline directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate->add_option("--split", split_name, "Split to evaluate (train, val or test)")
      ->check(CLI::IsMember({"train", "val", "test"}));
  evaluate->callback(
      [&] { exit_code = run_evaluate(eval_common.build(), pipeline_dir, split_name); });

  CLI::App* compare = app.add_subcommand(
      "compare", "Train all strategies at one pass rate and tabulate the comparison");
  compare_common.attach(compare, true);
  compare->callback([&] { exit_code = run_compare(compare_common.build()); });

  CLI::App* sweep =
      app.add_subcommand("sweep-passrate", "Run the comparison across a list of pass rates");
  sweep_common.attach(sweep, true);
  sweep->callback([&] { exit_code = run_sweep_passrate(sweep_common.build()); });

  CLI::App* fewshot = app.add_subcommand(
      "fewshot", "Compare independent vs feedback training on subsampled training data");
  fewshot_common.attach(fewshot, true);
  fewshot->callback([&] { exit_code = run_fewshot(fewshot_common.build()); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cascadeforge: error: %s\n", e.what());
    return 1;
  }
  return exit_code;
}
