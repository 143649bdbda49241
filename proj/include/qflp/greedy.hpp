#pragma once

#include "qflp/formulations.hpp"
#include "qflp/model.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

// Exact greedy building blocks (token placement, allocation, deallocation)
// and the Search post-processor that turns fractional surface allocations
// into integer ones using exactly p servers.
namespace qflp::greedy {

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AllocResult {
    std::vector<int> y;
    double total_n = 0.0;  // sum of expected requests in system
};

// Drops n tokens into buckets maximizing the total cost drop. gains[f](j) is
// the f-th bucket's marginal gain of its j-th token (j >= 1), which must be
// non-negative and non-increasing in j. Ties break on the lower bucket id,
// then the lower j. Throws InfeasibleError when sum(caps) < n.
std::vector<int> max_cost_drop(int n, const std::vector<std::function<double(int)>>& gains,
                               const std::vector<int>& caps);

// Optimal allocation for a known assignment: y >= max(y0, ceil(load /
// (0.98 mu))) element-wise, y <= k, sum y = p, minimizing the total expected
// number of requests in system. The p - sum y_min spare tokens are placed by
// max_cost_drop on the per-facility curves.
AllocResult alloc(int p, const std::vector<double>& assigned_load, const std::vector<double>& mu,
                  const std::vector<int>& k, const std::vector<int>& y0 = {});

// Reduce an over-allocation to exactly p servers without raising any
// facility above its current level: alloc from scratch with y <= y_start.
// nullopt when even the minimal allocation exceeds p.
std::optional<AllocResult> dealloc(int p, const std::vector<double>& assigned_load,
                                   const std::vector<double>& mu, const std::vector<int>& y_start);

// One formulation solve at budget p'.
using SolveAt = std::function<formulations::FormulationResult(int)>;

// Tries budgets p' <= p: round the returned allocation up; on a deficit
// alloc the remainder, on an excess dealloc or retry at p' - excess; on an
// infeasible p' step up by 1; never revisits a budget and stops after 50
// solver calls. The result is integer, uses exactly p servers, and carries
// the exact (queueing-based) objective. Throws InfeasibleError on
// exhaustion.
model::Solution search(const model::Instance& inst, const SolveAt& solve_at, int p);

}  // namespace qflp::greedy
