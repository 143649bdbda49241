#include "qflp/greedy.hpp"

#include "qflp/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <string>

namespace qflp::greedy {

namespace {

int min_servers(double load, double mu) {
    if (load <= 0.0) return 0;
    return static_cast<int>(std::ceil(load / (model::kCapacityCap * mu) - 1e-9));
}

double n_or_zero(double load, double mu, int y) {
    if (load <= 0.0) return 0.0;
    return qflp::queueing::n_system(load / mu, y);
}

}  // namespace

std::vector<int> max_cost_drop(int n, const std::vector<std::function<double(int)>>& gains,
                               const std::vector<int>& caps) {
    if (gains.size() != caps.size()) throw std::invalid_argument("max_cost_drop: size mismatch");
    const int total_cap = std::accumulate(caps.begin(), caps.end(), 0);
    if (total_cap < n)
        throw InfeasibleError("max_cost_drop: only " + std::to_string(total_cap) +
                              " slots for " + std::to_string(n) + " tokens");
    std::vector<int> y(gains.size(), 0);
    if (n <= 0) return y;

    struct Entry {
        double gain;
        std::size_t bucket;
        int j;
        bool operator<(const Entry& o) const {
            if (gain != o.gain) return gain < o.gain;  // max-heap on gain
            if (bucket != o.bucket) return bucket > o.bucket;
            return j > o.j;
        }
    };
    std::priority_queue<Entry> heap;
    for (std::size_t f = 0; f < gains.size(); ++f)
        if (caps[f] > 0) heap.push({gains[f](1), f, 1});
    for (int placed = 0; placed < n; ++placed) {
        const Entry top = heap.top();
        heap.pop();
        y[top.bucket] += 1;
        if (top.j < caps[top.bucket]) heap.push({gains[top.bucket](top.j + 1), top.bucket, top.j + 1});
    }
    return y;
}

AllocResult alloc(int p, const std::vector<double>& assigned_load, const std::vector<double>& mu,
                  const std::vector<int>& k, const std::vector<int>& y0) {
    const std::size_t F = assigned_load.size();
    if (mu.size() != F || k.size() != F || (!y0.empty() && y0.size() != F))
        throw std::invalid_argument("alloc: size mismatch");

    std::vector<int> y_min(F);
    for (std::size_t f = 0; f < F; ++f) {
        y_min[f] = std::max(y0.empty() ? 0 : y0[f], min_servers(assigned_load[f], mu[f]));
        if (y_min[f] > k[f])
            throw InfeasibleError("alloc: facility " + std::to_string(f) + " needs " +
                                  std::to_string(y_min[f]) + " > capacity " + std::to_string(k[f]));
    }
    const int base = std::accumulate(y_min.begin(), y_min.end(), 0);
    if (base > p)
        throw InfeasibleError("alloc: minimal allocation " + std::to_string(base) +
                              " exceeds budget " + std::to_string(p));

    std::vector<std::function<double(int)>> gains;
    std::vector<int> caps;
    for (std::size_t f = 0; f < F; ++f) {
        const double a = assigned_load[f] > 0.0 ? assigned_load[f] / mu[f] : 0.0;
        const int b = y_min[f];
        gains.push_back([a, b](int j) {
            if (a <= 0.0) return 0.0;
            return qflp::queueing::n_system(a, b + j - 1) - qflp::queueing::n_system(a, b + j);
        });
        caps.push_back(k[f] - y_min[f]);
    }
    auto extra = max_cost_drop(p - base, gains, caps);

    AllocResult res;
    res.y.resize(F);
    for (std::size_t f = 0; f < F; ++f) {
        res.y[f] = y_min[f] + extra[f];
        res.total_n += n_or_zero(assigned_load[f], mu[f], res.y[f]);
    }
    return res;
}

std::optional<AllocResult> dealloc(int p, const std::vector<double>& assigned_load,
                                   const std::vector<double>& mu,
                                   const std::vector<int>& y_start) {
    const std::size_t F = assigned_load.size();
    int base = 0;
    for (std::size_t f = 0; f < F; ++f) {
        const int need = min_servers(assigned_load[f], mu[f]);
        if (need > y_start[f]) return std::nullopt;  // started below the minimum
        base += need;
    }
    if (base > p) return std::nullopt;
    return alloc(p, assigned_load, mu, y_start);
}

model::Solution search(const model::Instance& inst, const SolveAt& solve_at, int p) {
    std::set<int> tested;
    int p_prime = p;
    int calls = 0;
    const int call_budget = 50;

    model::Instance target = inst;
    target.p = p;
    auto finalize = [&](std::vector<std::vector<double>> x, std::vector<int> y) {
        model::Solution sol;
        sol.x = std::move(x);
        sol.y = std::move(y);
        sol.objective_ms = model::evaluate(target, sol);
        return sol;
    };

    while (p_prime >= 1 && p_prime <= p && calls < call_budget) {
        if (tested.count(p_prime)) {
            ++p_prime;
            continue;
        }
        tested.insert(p_prime);
        ++calls;
        auto r = solve_at(p_prime);
        if (r.status == milp::SolveStatus::Infeasible) {
            ++p_prime;
            continue;
        }
        const std::size_t F = inst.n_facilities();
        std::vector<int> y(F);
        std::vector<double> load(F, 0.0);
        for (std::size_t f = 0; f < F; ++f) {
            y[f] = static_cast<int>(std::ceil(r.y_raw[f] - 1e-9));
            for (std::size_t c = 0; c < inst.n_clients(); ++c) {
                if (r.x[c][f] < 1e-9) r.x[c][f] = 0.0;  // solver noise
                load[f] += r.x[c][f];
            }
        }
        const int delta = std::accumulate(y.begin(), y.end(), 0) - p;
        if (delta == 0) return finalize(std::move(r.x), std::move(y));
        if (delta < 0) {
            auto grown = alloc(p, load, inst.mu, inst.k, y);
            return finalize(std::move(r.x), std::move(grown.y));
        }
        auto shrunk = dealloc(p, load, inst.mu, y);
        if (shrunk) return finalize(std::move(r.x), std::move(shrunk->y));
        p_prime -= delta;  // retry with the excess removed up front
    }
    throw InfeasibleError("search: no integer allocation with exactly " + std::to_string(p) +
                          " servers found");
}

}  // namespace qflp::greedy
