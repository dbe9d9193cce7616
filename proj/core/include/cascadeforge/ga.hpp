#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cascadeforge {

using Chromosome = std::vector<double>;

struct GeneBounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct GaConfig {
  int population_size = 20;  // >= 4, even
  int generations = 30;
  double crossover_prob = 0.7;
  double mutation_prob = 0.1;
  double mutation_sigma_fraction = 0.1;  // of each gene's range
  int tournament_k = 3;
  int elitism_count = 1;
  std::uint64_t seed = 0;
  std::vector<Chromosome> seeded_chromosomes;  // placed verbatim in generation 0

  void validate(std::size_t n_genes) const;
};

struct GaGenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
};

struct GaResult {
  Chromosome best;
  double best_fitness = 0.0;
  std::vector<GaGenerationStats> history;  // generations + 1 entries
  std::size_t fitness_evaluations = 0;
};

// Maximizes fitness over box-bounded real chromosomes. Generation 0 is the
// seeded chromosomes followed by uniform-random fill; afterwards tournament
// selection with replacement, arithmetic blend crossover, per-gene Gaussian
// mutation clipped to bounds, and elitism with cached fitness. All random
// choices for a generation are drawn from one stream before any fitness
// call, so evaluation order cannot change the result. Fitness must be total;
// callers map their errors to -infinity.
GaResult run_ga(const std::function<double(const Chromosome&)>& fitness,
                const std::vector<GeneBounds>& bounds, const GaConfig& config);

// History rows as "generation,best_fitness,mean_fitness" CSV text.
std::string ga_history_csv(const std::vector<GaGenerationStats>& history);

}  // namespace cascadeforge
