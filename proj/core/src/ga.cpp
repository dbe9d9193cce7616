#include "cascadeforge/ga.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cascadeforge/rng.hpp"

namespace cascadeforge {

void GaConfig::validate(std::size_t n_genes) const {
  if (population_size < 4 || population_size % 2 != 0) {
    throw std::invalid_argument("GaConfig: population_size must be even and >= 4");
  }
  if (generations < 1) throw std::invalid_argument("GaConfig: generations must be >= 1");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) {
    throw std::invalid_argument("GaConfig: crossover_prob must lie in [0, 1]");
  }
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
    throw std::invalid_argument("GaConfig: mutation_prob must lie in [0, 1]");
  }
  if (!(mutation_sigma_fraction > 0.0)) {
    throw std::invalid_argument("GaConfig: mutation_sigma_fraction must be > 0");
  }
  if (tournament_k < 2 || tournament_k > population_size) {
    throw std::invalid_argument("GaConfig: tournament_k must lie in [2, population_size]");
  }
  if (elitism_count < 0 || elitism_count > population_size) {
    throw std::invalid_argument("GaConfig: elitism_count must lie in [0, population_size]");
  }
  if (seeded_chromosomes.size() > static_cast<std::size_t>(population_size)) {
    throw std::invalid_argument("GaConfig: more seeded chromosomes than population slots");
  }
  for (const Chromosome& c : seeded_chromosomes) {
    if (c.size() != n_genes) {
      throw std::invalid_argument("GaConfig: seeded chromosome has wrong gene count");
    }
  }
}

namespace {

struct Individual {
  Chromosome genes;
  double fitness = 0.0;
};

// Indices of the population sorted by fitness descending, index ascending.
std::vector<std::size_t> ranked(const std::vector<Individual>& pop) {
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pop[a].fitness != pop[b].fitness) return pop[a].fitness > pop[b].fitness;
    return a < b;
  });
  return order;
}

std::size_t tournament(const std::vector<Individual>& pop, int k, Rng& rng) {
  std::size_t winner = rng.below(pop.size());
  for (int i = 1; i < k; ++i) {
    const std::size_t candidate = rng.below(pop.size());
    if (pop[candidate].fitness > pop[winner].fitness) winner = candidate;
  }
  return winner;
}

void mutate(Chromosome& genes, const std::vector<GeneBounds>& bounds,
            const GaConfig& cfg, Rng& rng) {
  for (std::size_t g = 0; g < genes.size(); ++g) {
    if (rng.uniform01() < cfg.mutation_prob) {
      const double range = bounds[g].hi - bounds[g].lo;
      genes[g] += rng.gaussian() * cfg.mutation_sigma_fraction * range;
    }
    genes[g] = std::clamp(genes[g], bounds[g].lo, bounds[g].hi);
  }
}

}  // namespace

GaResult run_ga(const std::function<double(const Chromosome&)>& fitness,
                const std::vector<GeneBounds>& bounds, const GaConfig& config) {
  if (bounds.empty()) throw std::invalid_argument("run_ga: empty bounds");
  for (const GeneBounds& b : bounds) {
    if (!(b.lo <= b.hi)) throw std::invalid_argument("run_ga: gene bound has lo > hi");
  }
  config.validate(bounds.size());
  for (const Chromosome& c : config.seeded_chromosomes) {
    for (std::size_t g = 0; g < c.size(); ++g) {
      if (c[g] < bounds[g].lo || c[g] > bounds[g].hi) {
        throw std::invalid_argument("run_ga: seeded chromosome violates gene bounds");
      }
    }
  }

  const auto pop_size = static_cast<std::size_t>(config.population_size);
  const auto elite_count = static_cast<std::size_t>(config.elitism_count);
  Rng rng(config.seed);

  GaResult result;
  result.best_fitness = -std::numeric_limits<double>::infinity();
  result.history.reserve(static_cast<std::size_t>(config.generations) + 1);

  auto record = [&](int generation, const std::vector<Individual>& pop) {
    GaGenerationStats stats;
    stats.generation = generation;
    stats.best_fitness = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const Individual& ind : pop) {
      stats.best_fitness = std::max(stats.best_fitness, ind.fitness);
      sum += ind.fitness;
    }
    stats.mean_fitness = sum / static_cast<double>(pop.size());
    result.history.push_back(stats);
  };
  auto evaluate = [&](Individual& ind) {
    ind.fitness = fitness(ind.genes);
    ++result.fitness_evaluations;
    if (ind.fitness > result.best_fitness) {
      result.best_fitness = ind.fitness;
      result.best = ind.genes;
    }
  };

  std::vector<Individual> pop;
  pop.reserve(pop_size);
  for (const Chromosome& seed : config.seeded_chromosomes) {
    pop.push_back(Individual{seed, 0.0});
  }
  while (pop.size() < pop_size) {
    Chromosome genes(bounds.size());
    for (std::size_t g = 0; g < bounds.size(); ++g) {
      genes[g] = rng.uniform(bounds[g].lo, bounds[g].hi);
    }
    pop.push_back(Individual{std::move(genes), 0.0});
  }
  for (Individual& ind : pop) evaluate(ind);
  record(0, pop);

  for (int generation = 1; generation <= config.generations; ++generation) {
    const std::vector<std::size_t> order = ranked(pop);

    // Breeding consumes the random stream fully before any fitness call.
    std::vector<Individual> next;
    next.reserve(pop_size);
    for (std::size_t e = 0; e < elite_count; ++e) next.push_back(pop[order[e]]);
    while (next.size() < pop_size) {
      const Chromosome& a = pop[tournament(pop, config.tournament_k, rng)].genes;
      const Chromosome& b = pop[tournament(pop, config.tournament_k, rng)].genes;
      Chromosome c1 = a;
      Chromosome c2 = b;
      if (rng.uniform01() < config.crossover_prob) {
        const double lambda = rng.uniform01();
        for (std::size_t g = 0; g < c1.size(); ++g) {
          c1[g] = lambda * a[g] + (1.0 - lambda) * b[g];
          c2[g] = lambda * b[g] + (1.0 - lambda) * a[g];
        }
      }
      mutate(c1, bounds, config, rng);
      next.push_back(Individual{std::move(c1), 0.0});
      if (next.size() < pop_size) {
        mutate(c2, bounds, config, rng);
        next.push_back(Individual{std::move(c2), 0.0});
      }
    }

    for (std::size_t i = elite_count; i < next.size(); ++i) evaluate(next[i]);
    pop = std::move(next);
    record(generation, pop);
  }
  return result;
}

std::string ga_history_csv(const std::vector<GaGenerationStats>& history) {
  std::string out = "generation,best_fitness,mean_fitness\n";
  char buf[96];
  for (const GaGenerationStats& row : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", row.generation, row.best_fitness,
                  row.mean_fitness);
    out += buf;
  }
  return out;
}

}  // namespace cascadeforge
