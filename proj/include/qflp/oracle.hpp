#pragma once

#include "qflp/model.hpp"

#include <optional>
#include <vector>

// Independent ground truth for small instances: exhaustive allocation
// enumeration with an exact convex assignment subsolver.
namespace qflp::oracle {

struct AssignmentResult {
    std::vector<std::vector<double>> x;
    double objective_ms = 0.0;
};

// Best assignment for a fixed allocation: minimizes average RTT plus exact
// time in system. Solved as a convex-cost transportation problem: a
// feasible waterfill start, then negative residual cycles on the marginal
// costs are canceled while the step width is refined geometrically.
// nullopt when the allocation cannot carry the demand.
std::optional<AssignmentResult> best_assignment(const model::Instance& inst,
                                                const std::vector<int>& y);

// As best_assignment but ignoring queueing in the routing decision (pure
// min-RTT transportation); the returned objective is still the exact one.
std::optional<AssignmentResult> min_rtt_assignment(const model::Instance& inst,
                                                   const std::vector<int>& y);

// Enumerates every allocation with sum y = p, y <= k and returns the best
// (y, x). Guarded to |F| <= 5 and sum k <= 30.
model::Solution oracle_solve(const model::Instance& inst);

// The latency-only reference: allocation and assignment chosen to minimize
// average RTT alone, evaluated afterwards with exact queueing. Same guards.
model::Solution latency_only_solve(const model::Instance& inst);

}  // namespace qflp::oracle
