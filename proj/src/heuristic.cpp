#include "qflp/heuristic.hpp"

#include "qflp/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace qflp::heuristic {

namespace {

bool contains(const FacilitySet& s, std::size_t f) {
    return std::binary_search(s.begin(), s.end(), f);
}

FacilitySet with(FacilitySet s, std::size_t f) {
    s.insert(std::lower_bound(s.begin(), s.end(), f), f);
    return s;
}

FacilitySet without(FacilitySet s, std::size_t f) {
    s.erase(std::lower_bound(s.begin(), s.end(), f));
    return s;
}

}  // namespace

std::optional<std::vector<std::vector<double>>> greedy_assign(const model::Instance& inst,
                                                              const FacilitySet& subset) {
    const std::size_t C = inst.n_clients(), F = inst.n_facilities();
    struct Pair {
        double l;
        std::size_t c, f;
    };
    std::vector<Pair> pairs;
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t f : subset) pairs.push_back({inst.latency_ms[c][f], c, f});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.l != b.l) return a.l < b.l;
        if (a.c != b.c) return a.c < b.c;
        return a.f < b.f;
    });

    std::vector<std::vector<double>> x(C, std::vector<double>(F, 0.0));
    std::vector<double> demand = inst.lambda;
    std::vector<double> cap(F, 0.0);
    for (std::size_t f : subset) cap[f] = model::kCapacityCap * inst.k[f] * inst.mu[f];
    for (const auto& pr : pairs) {
        if (demand[pr.c] <= 0.0 || cap[pr.f] <= 0.0) continue;
        const double amount = std::min(demand[pr.c], cap[pr.f]);
        x[pr.c][pr.f] += amount;
        demand[pr.c] -= amount;
        cap[pr.f] -= amount;
    }
    for (double d : demand)
        if (d > 1e-9) return std::nullopt;
    return x;
}

std::optional<SubsetSolution> solve_subset(const model::Instance& inst, const FacilitySet& subset,
                                           int p) {
    if (subset.empty()) return std::nullopt;
    auto x = greedy_assign(inst, subset);
    if (!x) return std::nullopt;
    const std::size_t F = inst.n_facilities();
    std::vector<double> load(F, 0.0);
    for (std::size_t c = 0; c < inst.n_clients(); ++c)
        for (std::size_t f = 0; f < F; ++f) load[f] += (*x)[c][f];
    std::vector<int> caps(F, 0);
    for (std::size_t f : subset) caps[f] = inst.k[f];
    greedy::AllocResult ar;
    try {
        ar = greedy::alloc(p, load, inst.mu, caps);
    } catch (const greedy::InfeasibleError&) {
        return std::nullopt;
    }
    SubsetSolution sol;
    sol.subset = subset;
    sol.x = std::move(*x);
    sol.y = std::move(ar.y);
    model::Instance target = inst;
    target.p = p;
    model::Solution ms{sol.x, sol.y, 0.0};
    sol.t = model::evaluate(target, ms);
    return sol;
}

std::vector<FacilitySet> neigh(const FacilitySet& subset, const FacilitySet& domain,
                               const FacilitySet& core) {
    std::vector<std::size_t> addable, removable;
    for (std::size_t f : domain)
        if (!contains(subset, f)) addable.push_back(f);
    for (std::size_t f : subset)
        if (!contains(core, f)) removable.push_back(f);

    std::vector<FacilitySet> out;
    std::set<FacilitySet> seen;
    auto push = [&](FacilitySet s) {
        if (seen.insert(s).second) out.push_back(std::move(s));
    };
    for (std::size_t f : addable) push(with(subset, f));
    for (std::size_t f : removable) push(without(subset, f));
    for (std::size_t f : addable)
        for (std::size_t g : removable) push(without(with(subset, f), g));
    return out;
}

std::optional<SubsetSolution> descent(const model::Instance& inst, const FacilitySet& seed, int p,
                                      const FacilitySet& domain, const FacilitySet& core) {
    std::optional<SubsetSolution> best = solve_subset(inst, seed, p);
    FacilitySet current = seed;
    bool improved = true;
    while (improved) {
        improved = false;
        for (const auto& cand : neigh(current, domain, core)) {
            auto sol = solve_subset(inst, cand, p);
            if (!sol) continue;
            if (!best || sol->t < best->t - 1e-12) {
                best = std::move(sol);
                improved = true;
            }
        }
        if (improved) current = best->subset;
    }
    return best;
}

model::Solution genetic(const model::Instance& inst, int p, const GeneticConfig& config) {
    const std::size_t F = inst.n_facilities();
    std::mt19937_64 rng(config.seed);
    const int pop_size = std::max(1, config.population_size);
    const int merges = config.merge_steps >= 0
                           ? config.merge_steps
                           : std::min<int>(5000, 50 * static_cast<int>(F));

    FacilitySet all(F);
    for (std::size_t f = 0; f < F; ++f) all[f] = f;
    auto random_subset = [&](std::size_t l) {
        FacilitySet pool = all;
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(std::min(l, pool.size()));
        std::sort(pool.begin(), pool.end());
        return pool;
    };

    std::vector<SubsetSolution> population;
    auto in_population = [&](const FacilitySet& s) {
        for (const auto& e : population)
            if (e.subset == s) return true;
        return false;
    };

    std::size_t l = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(F))));
    int attempts = 0;
    const int attempt_budget = 20 * pop_size;
    while (population.size() < static_cast<std::size_t>(pop_size)) {
        if (attempts >= attempt_budget) {
            if (l >= F) break;  // accept a smaller population if any exists
            ++l;
            attempts = 0;
            continue;
        }
        ++attempts;
        auto sol = descent(inst, random_subset(l), p, all, {});
        if (!sol) {
            if (l < F) ++l;
            continue;
        }
        if (!in_population(sol->subset)) population.push_back(std::move(*sol));
    }
    if (population.empty())
        throw greedy::InfeasibleError("genetic: no feasible facility subset found");

    for (int step = 0; step < merges && population.size() >= 2; ++step) {
        std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
        std::size_t i = pick(rng), j = pick(rng);
        while (j == i) j = pick(rng);
        const auto& a = population[i].subset;
        const auto& b = population[j].subset;
        FacilitySet inter, uni, sym;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
        std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                      std::back_inserter(sym));

        FacilitySet outside;
        std::set_difference(all.begin(), all.end(), uni.begin(), uni.end(),
                            std::back_inserter(outside));
        std::shuffle(outside.begin(), outside.end(), rng);
        FacilitySet domain = sym;
        for (std::size_t m = 0; m < std::min<std::size_t>(3, outside.size()); ++m)
            domain = with(domain, outside[m]);

        FacilitySet offspring = inter;
        if (!domain.empty()) {
            std::uniform_int_distribution<std::size_t> pickf(0, domain.size() - 1);
            const std::size_t f = domain[pickf(rng)];
            if (!contains(offspring, f)) offspring = with(offspring, f);
        }
        if (offspring.empty()) continue;

        // descent may only grow within core + domain
        FacilitySet full_domain = inter;
        for (std::size_t f : domain)
            if (!contains(full_domain, f)) full_domain = with(full_domain, f);

        auto child = descent(inst, offspring, p, full_domain, inter);
        if (!child || in_population(child->subset)) continue;
        std::size_t worst = 0;
        for (std::size_t e = 1; e < population.size(); ++e)
            if (population[e].t > population[worst].t) worst = e;
        if (child->t < population[worst].t) population[worst] = std::move(*child);
    }

    const SubsetSolution* best = &population.front();
    for (const auto& e : population)
        if (e.t < best->t) best = &e;

    model::Solution out{best->x, best->y, best->t};
    return out;
}

}  // namespace qflp::heuristic
