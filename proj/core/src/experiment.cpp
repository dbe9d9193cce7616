#include "cascadeforge/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "cascadeforge/evaluation.hpp"
#include "cascadeforge/log.hpp"
#include "cascadeforge/rng.hpp"

namespace fs = std::filesystem;

namespace cascadeforge {

namespace {

using nlohmann::json;

constexpr int kReportSchemaVersion = 1;

// Seed streams for the components derived from the master seed.
enum : std::uint64_t {
  kStreamGeneration = 1,
  kStreamSplit = 2,
  kStreamPreTrain = 3,
  kStreamMainTrain = 4,
  kStreamGa = 5,
  kStreamFewshot = 6,
};

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw std::runtime_error(origin + ": " + message);
}

void check_keys(const json& obj, const std::string& origin, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(origin, where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      fail(origin, "unknown key '" + key + "' in " + where);
    }
  }
}

double get_double(const json& obj, const char* key, double fallback,
                  const std::string& origin, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(origin, where + "." + key + " must be a number");
  return obj[key].get<double>();
}

std::int64_t get_int(const json& obj, const char* key, std::int64_t fallback,
                     const std::string& origin, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) fail(origin, where + "." + key + " must be an integer");
  return obj[key].get<std::int64_t>();
}

std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t fallback,
                      const std::string& origin, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) fail(origin, where + "." + key + " must be an integer");
  if (obj[key].is_number_unsigned()) return obj[key].get<std::uint64_t>();
  const auto v = obj[key].get<std::int64_t>();
  if (v < 0) fail(origin, where + "." + key + " must be >= 0");
  return static_cast<std::uint64_t>(v);
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& origin,
              const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) fail(origin, where + "." + key + " must be a boolean");
  return obj[key].get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& origin, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) fail(origin, where + "." + key + " must be a string");
  return obj[key].get<std::string>();
}

std::vector<double> get_double_list(const json& obj, const char* key,
                                    const std::string& origin, const std::string& where) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  if (!obj[key].is_array()) fail(origin, where + "." + key + " must be an array of numbers");
  for (const json& v : obj[key]) {
    if (!v.is_number()) fail(origin, where + "." + key + " must contain numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

TrainConfig parse_train(const json& obj, const TrainConfig& defaults,
                        const std::string& origin, const std::string& where) {
  check_keys(obj, origin, where,
             {"learning_rate", "epochs", "l2", "batch_size", "class_balanced"});
  TrainConfig cfg = defaults;
  cfg.learning_rate = get_double(obj, "learning_rate", cfg.learning_rate, origin, where);
  cfg.epochs = static_cast<int>(get_int(obj, "epochs", cfg.epochs, origin, where));
  cfg.l2 = get_double(obj, "l2", cfg.l2, origin, where);
  cfg.batch_size = static_cast<int>(get_int(obj, "batch_size", cfg.batch_size, origin, where));
  cfg.class_balanced = get_bool(obj, "class_balanced", cfg.class_balanced, origin, where);
  return cfg;
}

json train_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"epochs", cfg.epochs},
          {"l2", cfg.l2},
          {"batch_size", cfg.batch_size},
          {"class_balanced", cfg.class_balanced}};
}

GaConfig parse_ga(const json& obj, const std::string& origin, const std::string& where) {
  check_keys(obj, origin, where,
             {"population_size", "generations", "crossover_prob", "mutation_prob",
              "mutation_sigma_fraction", "tournament_k", "elitism_count"});
  GaConfig cfg;
  cfg.population_size =
      static_cast<int>(get_int(obj, "population_size", cfg.population_size, origin, where));
  cfg.generations = static_cast<int>(get_int(obj, "generations", cfg.generations, origin, where));
  cfg.crossover_prob = get_double(obj, "crossover_prob", cfg.crossover_prob, origin, where);
  cfg.mutation_prob = get_double(obj, "mutation_prob", cfg.mutation_prob, origin, where);
  cfg.mutation_sigma_fraction =
      get_double(obj, "mutation_sigma_fraction", cfg.mutation_sigma_fraction, origin, where);
  cfg.tournament_k = static_cast<int>(get_int(obj, "tournament_k", cfg.tournament_k, origin, where));
  cfg.elitism_count =
      static_cast<int>(get_int(obj, "elitism_count", cfg.elitism_count, origin, where));
  return cfg;
}

json ga_json(const GaConfig& cfg) {
  return {{"population_size", cfg.population_size},
          {"generations", cfg.generations},
          {"crossover_prob", cfg.crossover_prob},
          {"mutation_prob", cfg.mutation_prob},
          {"mutation_sigma_fraction", cfg.mutation_sigma_fraction},
          {"tournament_k", cfg.tournament_k},
          {"elitism_count", cfg.elitism_count}};
}

std::string format_double(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

json threshold_json(double th) {
  if (std::isinf(th)) return th < 0 ? "-inf" : "inf";
  return th;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

std::string to_string(FewshotMode mode) {
  return mode == FewshotMode::pre_only ? "pre-only" : "both";
}

FewshotMode fewshot_mode_from_string(const std::string& name) {
  if (name == "pre-only") return FewshotMode::pre_only;
  if (name == "both") return FewshotMode::both;
  throw std::invalid_argument("unknown fewshot mode '" + name +
                              "' (expected pre-only or both)");
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), path);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, origin, "config",
             {"seed", "output_dir", "threads", "dataset", "split", "features", "pre_train",
              "main_train", "ga", "strategies", "target_pass_rate", "pass_rate_sweep",
              "fewshot", "compose_class_weights", "main_score_folds"});

  ExperimentConfig cfg;
  cfg.seed = get_u64(root, "seed", 0, origin, "config");
  cfg.output_dir = get_string(root, "output_dir", cfg.output_dir, origin, "config");
  cfg.threads = static_cast<int>(get_int(root, "threads", cfg.threads, origin, "config"));

  if (!root.contains("dataset")) fail(origin, "config.dataset is required");
  const json& ds = root["dataset"];
  check_keys(ds, origin, "config.dataset", {"csv", "synthetic"});
  if (ds.contains("csv") == ds.contains("synthetic")) {
    fail(origin, "config.dataset must hold exactly one of 'csv' or 'synthetic'");
  }
  if (ds.contains("csv")) {
    const json& c = ds["csv"];
    check_keys(c, origin, "config.dataset.csv",
               {"path", "label_column", "text_column", "min_tokens"});
    CsvSourceConfig src;
    src.path = get_string(c, "path", "", origin, "config.dataset.csv");
    if (src.path.empty()) fail(origin, "config.dataset.csv.path is required");
    src.schema.label_column =
        get_string(c, "label_column", src.schema.label_column, origin, "config.dataset.csv");
    src.schema.text_column =
        get_string(c, "text_column", src.schema.text_column, origin, "config.dataset.csv");
    src.schema.min_tokens = static_cast<int>(
        get_int(c, "min_tokens", src.schema.min_tokens, origin, "config.dataset.csv"));
    cfg.csv = std::move(src);
  } else {
    const json& s = ds["synthetic"];
    check_keys(s, origin, "config.dataset.synthetic",
               {"n_samples", "dim_shared", "dim_main_only", "positive_fraction",
                "hard_negative_fraction", "cluster_separation", "noise_sigma"});
    SyntheticSpec spec;
    spec.n_samples = static_cast<int>(
        get_int(s, "n_samples", spec.n_samples, origin, "config.dataset.synthetic"));
    spec.dim_shared = static_cast<int>(
        get_int(s, "dim_shared", spec.dim_shared, origin, "config.dataset.synthetic"));
    spec.dim_main_only = static_cast<int>(
        get_int(s, "dim_main_only", spec.dim_main_only, origin, "config.dataset.synthetic"));
    spec.positive_fraction = get_double(s, "positive_fraction", spec.positive_fraction, origin,
                                        "config.dataset.synthetic");
    spec.hard_negative_fraction = get_double(s, "hard_negative_fraction",
                                             spec.hard_negative_fraction, origin,
                                             "config.dataset.synthetic");
    spec.cluster_separation = get_double(s, "cluster_separation", spec.cluster_separation,
                                         origin, "config.dataset.synthetic");
    spec.noise_sigma =
        get_double(s, "noise_sigma", spec.noise_sigma, origin, "config.dataset.synthetic");
    cfg.synthetic = spec;
  }

  if (root.contains("split")) {
    const json& sp = root["split"];
    check_keys(sp, origin, "config.split", {"train", "val", "test"});
    cfg.split_ratios.train = get_double(sp, "train", cfg.split_ratios.train, origin, "config.split");
    cfg.split_ratios.val = get_double(sp, "val", cfg.split_ratios.val, origin, "config.split");
    cfg.split_ratios.test = get_double(sp, "test", cfg.split_ratios.test, origin, "config.split");
  }
  if (root.contains("features")) {
    const json& f = root["features"];
    check_keys(f, origin, "config.features", {"k_pre", "k_main", "binary_counts"});
    const std::int64_t k_pre =
        get_int(f, "k_pre", static_cast<std::int64_t>(cfg.strategy.k_pre), origin,
                "config.features");
    const std::int64_t k_main =
        get_int(f, "k_main", static_cast<std::int64_t>(cfg.strategy.k_main), origin,
                "config.features");
    if (k_pre < 1 || k_main < 1) fail(origin, "config.features budgets must be >= 1");
    cfg.strategy.k_pre = static_cast<std::size_t>(k_pre);
    cfg.strategy.k_main = static_cast<std::size_t>(k_main);
    cfg.strategy.features.binary_counts = get_bool(
        f, "binary_counts", cfg.strategy.features.binary_counts, origin, "config.features");
  }
  if (root.contains("pre_train")) {
    cfg.strategy.pre_train =
        parse_train(root["pre_train"], cfg.strategy.pre_train, origin, "config.pre_train");
  }
  if (root.contains("main_train")) {
    cfg.strategy.main_train =
        parse_train(root["main_train"], cfg.strategy.main_train, origin, "config.main_train");
  }
  if (root.contains("ga")) cfg.strategy.ga = parse_ga(root["ga"], origin, "config.ga");
  if (root.contains("strategies")) {
    if (!root["strategies"].is_array()) fail(origin, "config.strategies must be an array");
    cfg.strategies.clear();
    for (const json& s : root["strategies"]) {
      if (!s.is_string()) fail(origin, "config.strategies must contain strings");
      cfg.strategies.push_back(strategy_from_string(s.get<std::string>()));
    }
  }
  cfg.strategy.target_pass_rate =
      get_double(root, "target_pass_rate", cfg.strategy.target_pass_rate, origin, "config");
  cfg.pass_rate_sweep = get_double_list(root, "pass_rate_sweep", origin, "config");
  if (root.contains("fewshot")) {
    const json& f = root["fewshot"];
    check_keys(f, origin, "config.fewshot", {"fractions", "mode"});
    cfg.fewshot_fractions = get_double_list(f, "fractions", origin, "config.fewshot");
    cfg.fewshot_mode = fewshot_mode_from_string(
        get_string(f, "mode", to_string(cfg.fewshot_mode), origin, "config.fewshot"));
  }
  cfg.strategy.compose_class_weights = get_bool(
      root, "compose_class_weights", cfg.strategy.compose_class_weights, origin, "config");
  cfg.strategy.main_score_folds = static_cast<int>(
      get_int(root, "main_score_folds", cfg.strategy.main_score_folds, origin, "config"));

  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::to_json_text() const {
  json root;
  root["seed"] = seed;
  root["output_dir"] = output_dir;
  root["threads"] = threads;
  if (csv) {
    root["dataset"]["csv"] = {{"path", csv->path},
                              {"label_column", csv->schema.label_column},
                              {"text_column", csv->schema.text_column},
                              {"min_tokens", csv->schema.min_tokens}};
  } else {
    const SyntheticSpec& s = *synthetic;
    root["dataset"]["synthetic"] = {{"n_samples", s.n_samples},
                                    {"dim_shared", s.dim_shared},
                                    {"dim_main_only", s.dim_main_only},
                                    {"positive_fraction", s.positive_fraction},
                                    {"hard_negative_fraction", s.hard_negative_fraction},
                                    {"cluster_separation", s.cluster_separation},
                                    {"noise_sigma", s.noise_sigma}};
  }
  root["split"] = {{"train", split_ratios.train},
                   {"val", split_ratios.val},
                   {"test", split_ratios.test}};
  root["features"] = {{"k_pre", strategy.k_pre},
                      {"k_main", strategy.k_main},
                      {"binary_counts", strategy.features.binary_counts}};
  root["pre_train"] = train_json(strategy.pre_train);
  root["main_train"] = train_json(strategy.main_train);
  root["ga"] = ga_json(strategy.ga);
  json names = json::array();
  for (Strategy s : strategies) names.push_back(to_string(s));
  root["strategies"] = names;
  root["target_pass_rate"] = strategy.target_pass_rate;
  root["pass_rate_sweep"] = pass_rate_sweep;
  root["fewshot"] = {{"fractions", fewshot_fractions}, {"mode", to_string(fewshot_mode)}};
  root["compose_class_weights"] = strategy.compose_class_weights;
  root["main_score_folds"] = strategy.main_score_folds;
  return root.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  if (!csv && !synthetic) {
    throw std::invalid_argument("ExperimentConfig: a dataset source is required");
  }
  if (csv && synthetic) {
    throw std::invalid_argument("ExperimentConfig: csv and synthetic sources are exclusive");
  }
  if (synthetic) synthetic->validate();
  if (strategies.empty()) {
    throw std::invalid_argument("ExperimentConfig: at least one strategy is required");
  }
  strategy.validate();
  for (double r : pass_rate_sweep) {
    if (!(r > 0.0 && r <= 1.0)) {
      throw std::invalid_argument("ExperimentConfig: sweep pass rates must lie in (0, 1]");
    }
  }
  for (double f : fewshot_fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw std::invalid_argument("ExperimentConfig: fewshot fractions must lie in (0, 1]");
    }
  }
  if (threads < 1) throw std::invalid_argument("ExperimentConfig: threads must be >= 1");
  if (output_dir.empty()) throw std::invalid_argument("ExperimentConfig: output_dir is empty");
}

std::uint64_t ExperimentConfig::generation_seed() const { return Rng::derive(seed, kStreamGeneration); }
std::uint64_t ExperimentConfig::split_seed() const { return Rng::derive(seed, kStreamSplit); }
std::uint64_t ExperimentConfig::fewshot_seed() const { return Rng::derive(seed, kStreamFewshot); }

StrategyConfig ExperimentConfig::resolved_strategy() const {
  StrategyConfig out = strategy;
  out.pre_train.seed = Rng::derive(seed, kStreamPreTrain);
  out.main_train.seed = Rng::derive(seed, kStreamMainTrain);
  out.ga.seed = Rng::derive(seed, kStreamGa);
  return out;
}

Dataset load_experiment_dataset(const ExperimentConfig& config) {
  if (config.csv) return load_csv(config.csv->path, config.csv->schema);
  return generate_synthetic(*config.synthetic, config.generation_seed());
}

SplitResult split_experiment_dataset(const ExperimentConfig& config, const Dataset& data) {
  return split(data, config.split_ratios, config.split_seed());
}

namespace {

struct StrategyRun {
  Strategy strategy;
  TrainedPipeline trained;
  PipelineReport val_report;
  PipelineReport test_report;
};

json split_report_json(const PipelineReport& r) {
  return {{"n", r.n},          {"n_pos", r.n_pos},       {"p_pre", r.p_pre},
          {"r_pre", r.r_pre},  {"p_main", r.p_main},     {"r_main", r.r_main},
          {"p_e2e", r.p_e2e},  {"r_e2e", r.r_e2e},       {"f1_e2e", r.f1_e2e},
          {"pass_rate", r.pass_rate}, {"main_calls", r.main_calls}};
}

json strategy_report_json(const StrategyRun& run, const ExperimentConfig& config,
                          double target_pass_rate) {
  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["strategy"] = to_string(run.strategy);
  report["seed"] = config.seed;
  report["target_pass_rate"] = target_pass_rate;
  report["calibration"] = {{"threshold", threshold_json(run.trained.calibration.threshold)},
                           {"target_count", run.trained.calibration.target_count},
                           {"passing_count", run.trained.calibration.passing_count},
                           {"degenerate", run.trained.calibration.degenerate}};
  report["val"] = split_report_json(run.val_report);
  report["test"] = split_report_json(run.test_report);
  if (run.trained.has_feedback_search) {
    const WeightParams& p = run.trained.weight_params;
    report["feedback"] = {
        {"weight_params",
         {{"t_pos", p.t_pos},
          {"t_neg", p.t_neg},
          {"a_pos", p.a_pos},
          {"a_neg", p.a_neg},
          {"w_neg_min", p.w_neg_min},
          {"w_max", p.w_max}}},
        {"best_chromosome", run.trained.best_chromosome},
        {"best_fitness", run.trained.ga_best_fitness},
        {"fitness_evaluations", run.trained.ga_fitness_evaluations}};
  }
  return report;
}

StrategyRun run_one_strategy(Strategy strategy, const Dataset& pre_data,
                             const Dataset& main_data, const Dataset& val,
                             const Dataset& test, const StrategyConfig& scfg) {
  StrategyRun run{strategy, train_strategy(strategy, pre_data, main_data, val, scfg), {}, {}};
  run.val_report = evaluate_pipeline(run.trained.pipeline, val, to_string(strategy));
  run.val_report.split = "val";
  run.test_report = evaluate_pipeline(run.trained.pipeline, test, to_string(strategy));
  run.test_report.split = "test";
  return run;
}

void write_strategy_artifacts(const fs::path& dir, const StrategyRun& run,
                              const ExperimentConfig& config, double target_pass_rate) {
  const std::string tag = to_string(run.strategy);
  write_text(dir / ("report_" + tag + ".json"),
             strategy_report_json(run, config, target_pass_rate).dump(2) + "\n");
  run.trained.pipeline.save((dir / ("pipeline_" + tag)).string());
  if (run.trained.has_feedback_search) {
    write_text(dir / ("ga_history_" + tag + ".csv"), ga_history_csv(run.trained.ga_history));
  }
}

// Trains and evaluates every requested strategy at one pass rate, writing
// per-strategy artifacts into dir.
std::vector<StrategyRun> run_protocol(const ExperimentConfig& config,
                                      const std::vector<Strategy>& strategies,
                                      double target_pass_rate, const Dataset& pre_data,
                                      const Dataset& main_data, const Dataset& val,
                                      const Dataset& test, const fs::path& dir) {
  StrategyConfig scfg = config.resolved_strategy();
  scfg.target_pass_rate = target_pass_rate;
  std::vector<StrategyRun> runs;
  runs.reserve(strategies.size());
  for (Strategy strategy : strategies) {
    log::info("running strategy " + to_string(strategy) + " at pass rate " +
              format_double(target_pass_rate, "%g"));
    runs.push_back(run_one_strategy(strategy, pre_data, main_data, val, test, scfg));
    write_strategy_artifacts(dir, runs.back(), config, target_pass_rate);
  }
  return runs;
}

void check_fairness(const std::vector<StrategyRun>& runs, std::size_t val_size) {
  if (runs.size() < 2) return;
  double lo = runs.front().val_report.pass_rate;
  double hi = lo;
  for (const StrategyRun& run : runs) {
    lo = std::min(lo, run.val_report.pass_rate);
    hi = std::max(hi, run.val_report.pass_rate);
  }
  const double tolerance = 1.0 / static_cast<double>(val_size);
  if (hi - lo > tolerance) {
    log::warn("strategies disagree on validation pass rate by " + format_double(hi - lo, "%g") +
              " (tolerance " + format_double(tolerance, "%g") + ")");
  }
}

const char* kTableCsvHeader =
    "strategy,split,target_pass_rate,measured_pass_rate,main_calls,"
    "p_pre,r_pre,p_main,r_main,p_e2e,r_e2e,f1_e2e\n";

void append_table_csv(std::string& out, const StrategyRun& run, double target_rate) {
  for (const PipelineReport* r : {&run.val_report, &run.test_report}) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s,%s,%.6f,%.6f,%lld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  to_string(run.strategy).c_str(), r->split.c_str(), target_rate, r->pass_rate,
                  static_cast<long long>(r->main_calls), r->p_pre, r->r_pre, r->p_main,
                  r->r_main, r->p_e2e, r->r_e2e, r->f1_e2e);
    out += buf;
  }
}

const char* kTableTextHeader =
    "strategy     split  PassRate  R_pre   P_main  R_main  P_e2e   R_e2e   F1_e2e  MainCalls\n";

void append_table_text(std::string& out, const StrategyRun& run) {
  for (const PipelineReport* r : {&run.val_report, &run.test_report}) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%-12s %-5s  %.4f    %.4f  %.4f  %.4f  %.4f  %.4f  %.4f  %lld\n",
                  to_string(run.strategy).c_str(), r->split.c_str(), r->pass_rate, r->r_pre,
                  r->p_main, r->r_main, r->p_e2e, r->r_e2e, r->f1_e2e,
                  static_cast<long long>(r->main_calls));
    out += buf;
  }
}

void log_resolved_config(const ExperimentConfig& config) {
  if (log::enabled(log::Level::info)) {
    log::info("resolved config:\n" + config.to_json_text());
  }
}

}  // namespace

int run_gen_data(const ExperimentConfig& config) {
  log_resolved_config(config);
  if (!config.synthetic) {
    throw std::invalid_argument("gen-data requires a synthetic dataset source");
  }
  const Dataset data = generate_synthetic(*config.synthetic, config.generation_seed());
  const fs::path out = fs::path(config.output_dir) / "synthetic.csv";
  fs::create_directories(out.parent_path());
  save_csv(data, out.string());
  log::info("wrote " + std::to_string(data.size()) + " samples (" +
            std::to_string(data.positives()) + " positive) to " + out.string());
  return 0;
}

int run_train(const ExperimentConfig& config) {
  log_resolved_config(config);
  const Dataset data = load_experiment_dataset(config);
  const SplitResult splits = split_experiment_dataset(config, data);
  const fs::path out(config.output_dir);
  fs::create_directories(out);
  write_text(out / "config.json", config.to_json_text());
  run_protocol(config, config.strategies, config.strategy.target_pass_rate, splits.train,
               splits.train, splits.val, splits.test, out);
  return 0;
}

int run_evaluate(const ExperimentConfig& config, const std::string& pipeline_dir,
                 const std::string& split_name) {
  log_resolved_config(config);
  const Dataset data = load_experiment_dataset(config);
  const SplitResult splits = split_experiment_dataset(config, data);
  const Dataset* target = nullptr;
  if (split_name == "train") target = &splits.train;
  else if (split_name == "val") target = &splits.val;
  else if (split_name == "test") target = &splits.test;
  else throw std::invalid_argument("unknown split '" + split_name + "' (expected train, val or test)");

  const CascadePipeline pipeline = CascadePipeline::load(pipeline_dir);
  PipelineReport report = evaluate_pipeline(pipeline, *target);
  report.split = split_name;

  json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["pipeline"] = pipeline_dir;
  doc["split"] = split_name;
  doc["seed"] = config.seed;
  doc["metrics"] = split_report_json(report);
  const fs::path out(config.output_dir);
  write_text(out / "report_evaluate.json", doc.dump(2) + "\n");
  return 0;
}

int run_compare(const ExperimentConfig& config) {
  log_resolved_config(config);
  const Dataset data = load_experiment_dataset(config);
  const SplitResult splits = split_experiment_dataset(config, data);
  const fs::path out(config.output_dir);
  fs::create_directories(out);
  write_text(out / "config.json", config.to_json_text());

  const std::vector<StrategyRun> runs =
      run_protocol(config, config.strategies, config.strategy.target_pass_rate, splits.train,
                   splits.train, splits.val, splits.test, out);
  check_fairness(runs, splits.val.size());

  std::string csv_text = kTableCsvHeader;
  std::string table_text = kTableTextHeader;
  for (const StrategyRun& run : runs) {
    append_table_csv(csv_text, run, config.strategy.target_pass_rate);
    append_table_text(table_text, run);
  }
  write_text(out / "table.csv", csv_text);
  write_text(out / "table.txt", table_text);
  return 0;
}

int run_sweep_passrate(const ExperimentConfig& config) {
  log_resolved_config(config);
  if (config.pass_rate_sweep.empty()) {
    throw std::invalid_argument("sweep-passrate requires a non-empty pass_rate_sweep list");
  }
  const Dataset data = load_experiment_dataset(config);
  const SplitResult splits = split_experiment_dataset(config, data);
  const fs::path out(config.output_dir);
  fs::create_directories(out);
  write_text(out / "config.json", config.to_json_text());

  std::string csv_text = kTableCsvHeader;
  std::string table_text;
  for (double rate : config.pass_rate_sweep) {
    const std::string tag = format_double(rate, "%g");
    const fs::path dir = out / ("rate_" + tag);
    fs::create_directories(dir);
    const std::vector<StrategyRun> runs = run_protocol(
        config, config.strategies, rate, splits.train, splits.train, splits.val, splits.test, dir);
    check_fairness(runs, splits.val.size());
    table_text += "== PassRate " + tag + " ==\n" + kTableTextHeader;
    for (const StrategyRun& run : runs) {
      append_table_csv(csv_text, run, rate);
      append_table_text(table_text, run);
    }
    table_text += "\n";
  }
  write_text(out / "sweep.csv", csv_text);
  write_text(out / "sweep.txt", table_text);
  return 0;
}

int run_fewshot(const ExperimentConfig& config) {
  log_resolved_config(config);
  if (config.fewshot_fractions.empty()) {
    throw std::invalid_argument("fewshot requires a non-empty fewshot.fractions list");
  }
  const Dataset data = load_experiment_dataset(config);
  const SplitResult splits = split_experiment_dataset(config, data);
  const fs::path out(config.output_dir);
  fs::create_directories(out);
  write_text(out / "config.json", config.to_json_text());

  const std::vector<Strategy> pair{Strategy::independent, Strategy::feedback};
  std::string csv_text =
      "fraction,mode,strategy,split,p_pre,r_pre,p_main,r_main,r_e2e,f1_e2e,improvement\n";
  std::string table_text =
      "fraction  strategy     split  P_pre   R_pre   P_main  R_main  R_e2e   F1_e2e  Improvement\n";
  json errors = json::array();

  for (double fraction : config.fewshot_fractions) {
    const std::string tag = format_double(fraction, "%g");
    const fs::path dir = out / ("frac_" + tag);
    try {
      const Dataset pre_data = subsample(splits.train, fraction, config.fewshot_seed());
      const Dataset& main_data =
          config.fewshot_mode == FewshotMode::pre_only ? splits.train : pre_data;
      fs::create_directories(dir);
      const std::vector<StrategyRun> runs =
          run_protocol(config, pair, config.strategy.target_pass_rate, pre_data, main_data,
                       splits.val, splits.test, dir);
      check_fairness(runs, splits.val.size());

      const StrategyRun& indep = runs[0];
      const StrategyRun& feed = runs[1];
      for (const StrategyRun* run : {&indep, &feed}) {
        for (const PipelineReport* r : {&run->val_report, &run->test_report}) {
          const bool with_improvement = run == &feed;
          std::string improvement_csv, improvement_text;
          if (with_improvement) {
            const PipelineReport& base =
                r->split == "val" ? indep.val_report : indep.test_report;
            const double imp = relative_improvement(base.f1_e2e, r->f1_e2e);
            improvement_csv = format_double(imp, "%.6f");
            improvement_text = format_double(100.0 * imp, "%+.2f") + "%";
          }
          char buf[256];
          std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%s\n",
                        tag.c_str(), to_string(config.fewshot_mode).c_str(),
                        to_string(run->strategy).c_str(), r->split.c_str(), r->p_pre, r->r_pre,
                        r->p_main, r->r_main, r->r_e2e, r->f1_e2e, improvement_csv.c_str());
          csv_text += buf;
          std::snprintf(buf, sizeof buf,
                        "%-8s  %-12s %-5s  %.4f  %.4f  %.4f  %.4f  %.4f  %.4f  %s\n",
                        tag.c_str(), to_string(run->strategy).c_str(), r->split.c_str(),
                        r->p_pre, r->r_pre, r->p_main, r->r_main, r->r_e2e, r->f1_e2e,
                        improvement_text.c_str());
          table_text += buf;
        }
      }
    } catch (const std::exception& e) {
      log::error("fewshot fraction " + tag + " failed: " + e.what());
      errors.push_back({{"fraction", fraction}, {"error", e.what()}});
    }
  }

  write_text(out / "fewshot.csv", csv_text);
  write_text(out / "fewshot.txt", table_text);
  write_text(out / "fewshot_errors.json", errors.dump(2) + "\n");
  return errors.empty() ? 0 : 1;
}

}  // namespace cascadeforge
