#pragma once

#include "qflp/model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

// Genetic metaheuristic: nearest-capacity greedy assignment, local search
// over facility subsets, and population-based recombination.
namespace qflp::heuristic {

using FacilitySet = std::vector<std::size_t>;  // sorted, unique

struct SubsetSolution {
    FacilitySet subset;
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    double t = 0.0;  // exact average response time (ms)
};

struct GeneticConfig {
    int population_size = 10;
    int merge_steps = -1;  // negative: 50 * |F| capped at 5000
    std::uint64_t seed = 0;
};

// Assign every client's demand to the nearest subset facility with spare
// capacity (capacity 0.98 * k_f * mu_f; pair order: latency, then client
// id, then facility id). nullopt when demand remains unassigned.
std::optional<std::vector<std::vector<double>>> greedy_assign(const model::Instance& inst,
                                                              const FacilitySet& subset);

// greedy_assign + optimal allocation of p servers within the subset; t from
// the exact objective. nullopt when either step is infeasible.
std::optional<SubsetSolution> solve_subset(const model::Instance& inst, const FacilitySet& subset,
                                           int p);

// All subsets reachable by adding one facility from domain \ subset,
// removing one from subset \ core, or both; deduplicated, deterministic
// order. Requires core <= subset <= domain.
std::vector<FacilitySet> neigh(const FacilitySet& subset, const FacilitySet& domain,
                               const FacilitySet& core);

// Steepest descent over solve_subset values until no neighbor improves.
std::optional<SubsetSolution> descent(const model::Instance& inst, const FacilitySet& seed, int p,
                                      const FacilitySet& domain, const FacilitySet& core);

// Population search: descent-refined random subsets of size floor(sqrt|F|)
// (growing on failure), then merge steps recombining two parents via
// intersection/symmetric-difference plus three mutants. Deterministic for a
// fixed seed. Throws greedy::InfeasibleError via its callees when no
// feasible subset exists at all.
model::Solution genetic(const model::Instance& inst, int p, const GeneticConfig& config = {});

}  // namespace qflp::heuristic
