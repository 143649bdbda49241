#include "qflp/oracle.hpp"

#include "qflp/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qflp::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Convex-cost transportation: clients ship lambda_c to facilities with
// per-unit arc cost l[c][f] plus a convex facility cost q(f, load). A
// trivial capacity-respecting waterfill seeds a feasible assignment, then
// negative residual cycles on the marginal costs are canceled while the
// step width is halved down to a ~1e-9 relative resolution. Exact for
// linear q; for smooth convex q the remaining error is O(step * curvature).
struct Transport {
    std::size_t C, F;
    const std::vector<std::vector<double>>& l;
    const std::vector<double>& lambda;
    std::vector<double> cap;
    std::function<double(std::size_t, double)> q;  // facility cost at a load

    std::vector<std::vector<double>> x;
    std::vector<double> load;

    Transport(const model::Instance& inst, std::vector<double> caps,
              std::function<double(std::size_t, double)> qf)
        : C(inst.n_clients()),
          F(inst.n_facilities()),
          l(inst.latency_ms),
          lambda(inst.lambda),
          cap(std::move(caps)),
          q(std::move(qf)),
          x(C, std::vector<double>(F, 0.0)),
          load(F, 0.0) {}

    double total_cost() const {
        double t = 0.0;
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t f = 0; f < F; ++f) t += x[c][f] * l[c][f];
        for (std::size_t f = 0; f < F; ++f) t += q(f, load[f]);
        return t;
    }

    // Node ids: clients 0..C-1, facilities C..C+F-1, supersink C+F. The
    // queueing marginal lives on the facility<->sink arcs so that load
    // shifts between facilities close into residual cycles through the
    // sink and stay visible to the cycle canceller.
    std::size_t sink() const { return C + F; }

    struct Arc {
        std::size_t from, to;
        double cost;    // per unit moved
        double bound;   // max amount this arc supports
        std::size_t c, f;
        enum Kind { IncX, DecX, IncLoad, DecLoad } kind;
    };

    // Marginal per-unit costs at step delta; isolated moves of delta are
    // priced exactly (forward differences up, backward differences down).
    std::vector<Arc> residual_arcs(double delta) const {
        std::vector<Arc> arcs;
        for (std::size_t f = 0; f < F; ++f) {
            const std::size_t fn = C + f;
            for (std::size_t c = 0; c < C; ++c) {
                arcs.push_back({c, fn, l[c][f], kInf, c, f, Arc::IncX});
                if (x[c][f] > 1e-12)
                    arcs.push_back({fn, c, -l[c][f], x[c][f], c, f, Arc::DecX});
            }
            if (load[f] + delta <= cap[f] + 1e-12) {
                const double dq = (q(f, load[f] + delta) - q(f, load[f])) / delta;
                arcs.push_back({fn, sink(), dq, cap[f] - load[f], 0, f, Arc::IncLoad});
            }
            if (load[f] > 1e-12) {
                const double step = std::min(delta, load[f]);
                const double dq = (q(f, load[f]) - q(f, load[f] - step)) / step;
                arcs.push_back({sink(), fn, -dq, load[f], 0, f, Arc::DecLoad});
            }
        }
        return arcs;
    }

    void apply(const Arc& arc, double amount) {
        if (arc.kind == Arc::IncX) {
            x[arc.c][arc.f] += amount;
            load[arc.f] += amount;
        } else if (arc.kind == Arc::DecX) {
            x[arc.c][arc.f] -= amount;
            load[arc.f] -= amount;
        }
        // sink arcs are bookkeeping only: load follows the x updates
    }

    // Seed a feasible assignment by pouring each client's demand into the
    // facilities in index order, respecting capacities. Always succeeds
    // when total capacity covers total demand; optimality comes entirely
    // from the cycle-canceling phase.
    bool route_all() {
        for (std::size_t c = 0; c < C; ++c) {
            double remaining = lambda[c];
            for (std::size_t f = 0; f < F && remaining > 1e-12; ++f) {
                const double room = cap[f] - load[f];
                if (room <= 1e-12) continue;
                const double amount = std::min(remaining, room);
                x[c][f] += amount;
                load[f] += amount;
                remaining -= amount;
            }
            if (remaining > 1e-9) return false;
        }
        return true;
    }

    // Cancel negative marginal-cost cycles at step delta; keeps the true
    // objective monotone by reverting any numerically unprofitable shift.
    void cancel_cycles(double delta) {
        const std::size_t n = C + F + 1;
        for (int round = 0; round < 2000; ++round) {
            const auto arcs = residual_arcs(delta);
            std::vector<double> dist(n, 0.0);
            std::vector<std::ptrdiff_t> parent(n, -1);
            std::size_t touched = n;
            for (std::size_t it = 0; it < n; ++it) {
                touched = n;
                for (std::size_t a = 0; a < arcs.size(); ++a) {
                    const Arc& arc = arcs[a];
                    const double nd = dist[arc.from] + arc.cost;
                    if (nd < dist[arc.to] - 1e-12) {
                        dist[arc.to] = nd;
                        parent[arc.to] = static_cast<std::ptrdiff_t>(a);
                        touched = arc.to;
                    }
                }
                if (touched == n) break;
            }
            if (touched == n) return;  // no negative cycle at this step

            // step back n times to land inside the cycle, then extract it
            std::size_t v = touched;
            for (std::size_t i = 0; i < n; ++i) {
                if (parent[v] < 0) return;  // defensive: chain leaves the cycle
                v = arcs[static_cast<std::size_t>(parent[v])].from;
            }
            std::vector<std::size_t> cycle;
            std::size_t u = v;
            do {
                const std::size_t a = static_cast<std::size_t>(parent[u]);
                cycle.push_back(a);
                u = arcs[a].from;
            } while (u != v && cycle.size() <= arcs.size());
            if (u != v) return;  // defensive

            double amount = delta;
            for (std::size_t a : cycle) amount = std::min(amount, arcs[a].bound);
            if (amount <= 1e-15) return;
            const double before = total_cost();
            for (std::size_t a : cycle) apply(arcs[a], amount);
            if (total_cost() > before - 1e-15) {
                for (std::size_t a : cycle) apply(arcs[a], -amount);
                return;
            }
        }
    }

    bool solve() {
        double total = 0.0, cap_total = 0.0;
        for (double d : lambda) total += d;
        for (double c : cap) cap_total += c;
        if (cap_total + 1e-9 < total) return false;
        if (total <= 0.0) return true;

        double delta = total / 64.0;
        if (!route_all()) return false;
        const double floor_delta = total * 1e-9;
        while (delta > floor_delta) {
            cancel_cycles(delta);
            delta *= 0.5;
        }
        cancel_cycles(delta);
        return true;
    }
};

std::vector<double> caps_for(const model::Instance& inst, const std::vector<int>& y) {
    std::vector<double> cap(inst.n_facilities());
    for (std::size_t f = 0; f < inst.n_facilities(); ++f)
        cap[f] = model::kCapacityCap * y[f] * inst.mu[f];
    return cap;
}

double exact_objective(const model::Instance& inst, const std::vector<int>& y,
                       const std::vector<std::vector<double>>& x) {
    double num = 0.0, denom = 0.0;
    for (std::size_t c = 0; c < inst.n_clients(); ++c) {
        denom += inst.lambda[c];
        for (std::size_t f = 0; f < inst.n_facilities(); ++f) num += x[c][f] * inst.latency_ms[c][f];
    }
    for (std::size_t f = 0; f < inst.n_facilities(); ++f) {
        double load = 0.0;
        for (std::size_t c = 0; c < inst.n_clients(); ++c) load += x[c][f];
        if (load <= 1e-12) continue;
        num += 1000.0 * queueing::n_system(load / inst.mu[f], y[f]);
    }
    return num / denom;
}

std::optional<AssignmentResult> run_assignment(const model::Instance& inst,
                                               const std::vector<int>& y, bool with_queueing) {
    inst.check();
    if (y.size() != inst.n_facilities())
        throw std::invalid_argument("assignment: allocation size mismatch");
    auto q = [&](std::size_t f, double load) -> double {
        if (!with_queueing || load <= 1e-15) return 0.0;
        return 1000.0 * queueing::n_system(load / inst.mu[f], y[f]);
    };
    Transport t(inst, caps_for(inst, y), q);
    if (!t.solve()) return std::nullopt;
    AssignmentResult res;
    res.x = std::move(t.x);
    res.objective_ms = exact_objective(inst, y, res.x);
    return res;
}

void check_guards(const model::Instance& inst) {
    inst.check();
    if (inst.n_facilities() > 5)
        throw std::invalid_argument("oracle: more than 5 facilities");
    int total_k = 0;
    for (int v : inst.k) total_k += v;
    if (total_k > 30) throw std::invalid_argument("oracle: total server capacity above 30");
}

// Visits every allocation with sum y = p, y <= k.
void enumerate_allocations(const model::Instance& inst,
                           const std::function<void(const std::vector<int>&)>& visit) {
    const std::size_t F = inst.n_facilities();
    std::vector<int> y(F, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t f, int left) {
        if (f + 1 == F) {
            if (left <= inst.k[f]) {
                y[f] = left;
                visit(y);
            }
            return;
        }
        for (int v = 0; v <= std::min(inst.k[f], left); ++v) {
            y[f] = v;
            rec(f + 1, left - v);
        }
    };
    if (F > 0 && inst.p >= 0) rec(0, inst.p);
}

}  // namespace

std::optional<AssignmentResult> best_assignment(const model::Instance& inst,
                                                const std::vector<int>& y) {
    return run_assignment(inst, y, true);
}

std::optional<AssignmentResult> min_rtt_assignment(const model::Instance& inst,
                                                   const std::vector<int>& y) {
    return run_assignment(inst, y, false);
}

model::Solution oracle_solve(const model::Instance& inst) {
    check_guards(inst);
    model::Solution best;
    bool found = false;
    enumerate_allocations(inst, [&](const std::vector<int>& y) {
        double cap_total = 0.0;
        for (std::size_t f = 0; f < inst.n_facilities(); ++f)
            cap_total += model::kCapacityCap * y[f] * inst.mu[f];
        if (cap_total + 1e-9 < inst.total_demand()) return;
        auto res = best_assignment(inst, y);
        if (!res) return;
        if (!found || res->objective_ms < best.objective_ms) {
            best.x = std::move(res->x);
            best.y = y;
            best.objective_ms = res->objective_ms;
            found = true;
        }
    });
    if (!found) throw std::runtime_error("oracle: no feasible allocation for the given budget");
    return best;
}

model::Solution latency_only_solve(const model::Instance& inst) {
    check_guards(inst);
    model::Solution best;
    double best_rtt = kInf;
    enumerate_allocations(inst, [&](const std::vector<int>& y) {
        double cap_total = 0.0;
        for (std::size_t f = 0; f < inst.n_facilities(); ++f)
            cap_total += model::kCapacityCap * y[f] * inst.mu[f];
        if (cap_total + 1e-9 < inst.total_demand()) return;
        auto res = min_rtt_assignment(inst, y);
        if (!res) return;
        double rtt = 0.0;
        for (std::size_t c = 0; c < inst.n_clients(); ++c)
            for (std::size_t f = 0; f < inst.n_facilities(); ++f)
                rtt += res->x[c][f] * inst.latency_ms[c][f];
        if (rtt < best_rtt - 1e-12) {
            best_rtt = rtt;
            best.x = std::move(res->x);
            best.y = y;
            best.objective_ms = res->objective_ms;
        }
    });
    if (best_rtt == kInf)
        throw std::runtime_error("oracle: no feasible allocation for the given budget");
    return best;
}

}  // namespace qflp::oracle
