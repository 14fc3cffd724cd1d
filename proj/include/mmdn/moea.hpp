#pragma once

#include <cstdint>
#include <string>

#include "mmdn/problems.hpp"

namespace mmdn {

struct Individual {
    Vec x;
    Vec f;
    std::size_t rank = 0;
    double crowding = 0.0;
};

struct Population {
    std::vector<Individual> individuals;
    std::size_t generation = 0;
    std::size_t eval_count = 0;
    std::uint64_t rng_state = 0;  // allows exact continuation for budget matching
};

struct MoeaConfig {
    std::size_t pop_size = 40;
    double crossover_prob = 0.9;
    double crossover_eta = 15.0;
    double mutation_prob = -1.0;  // <= 0 picks 1/n
    double mutation_eta = 20.0;
    std::uint64_t seed = 1;
};

namespace moea {

// Fast non-dominated sort; front 0 is the nondominated set.
std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<Vec>& objectives);

// Crowding distances of one front (boundary points get +infinity).
Vec crowding_distance(const std::vector<Vec>& front);

// Standard NSGA-II: binary tournament on (rank, crowding), simulated binary
// crossover, polynomial mutation, (mu+mu) elitist selection.
// eval_count of the result is exactly pop_size * (generations + 1).
Population nsga2_run(const ProblemDef& problem, const MoeaConfig& cfg, std::size_t generations);

// Resume a finished run for extra generations (same stream as a longer run).
Population nsga2_continue(Population pop, const ProblemDef& problem, const MoeaConfig& cfg,
                          std::size_t extra_generations);

// CSV serialization, one row per individual: decision, objectives, rank, crowding.
std::string population_csv(const Population& pop);

}  // namespace moea
}  // namespace mmdn
