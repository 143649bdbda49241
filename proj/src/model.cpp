#include "qflp/model.hpp"

#include "qflp/queueing.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qflp::model {

double Instance::total_demand() const { return std::accumulate(lambda.begin(), lambda.end(), 0.0); }

int Instance::total_capacity() const { return std::accumulate(k.begin(), k.end(), 0); }

void Instance::check() const {
    const std::size_t C = clients.size(), F = facilities.size();
    if (C == 0 || F == 0) throw std::invalid_argument("instance: need at least one client and one facility");
    if (lambda.size() != C) throw std::invalid_argument("instance: lambda size mismatch");
    if (mu.size() != F || k.size() != F) throw std::invalid_argument("instance: mu/k size mismatch");
    if (latency_ms.size() != C) throw std::invalid_argument("instance: latency row count mismatch");
    for (const auto& row : latency_ms) {
        if (row.size() != F) throw std::invalid_argument("instance: latency column count mismatch");
        for (double l : row)
            if (!(l >= 0.0)) throw std::invalid_argument("instance: negative latency");
    }
    for (double l : lambda)
        if (!(l >= 0.0)) throw std::invalid_argument("instance: negative demand");
    for (double m : mu)
        if (!(m > 0.0)) throw std::invalid_argument("instance: service rate must be positive");
    for (int kk : k)
        if (kk < 1) throw std::invalid_argument("instance: capacity must be >= 1");
    if (p < 1) throw std::invalid_argument("instance: budget must be >= 1");
    if (p > total_capacity()) throw std::invalid_argument("instance: budget exceeds total capacity");
}

double Solution::load(std::size_t f) const {
    double s = 0.0;
    for (const auto& row : x) s += row[f];
    return s;
}

ValidationReport validate(const Instance& inst, const Solution& sol) {
    ValidationReport rep;
    auto flag = [&](std::string msg) {
        rep.ok = false;
        rep.violations.push_back(std::move(msg));
    };
    const std::size_t C = inst.n_clients(), F = inst.n_facilities();
    if (sol.x.size() != C || sol.y.size() != F) {
        flag("shape: x/y dimensions do not match the instance");
        return rep;
    }
    for (std::size_t c = 0; c < C; ++c) {
        if (sol.x[c].size() != F) {
            flag("shape: x row " + std::to_string(c) + " has wrong width");
            return rep;
        }
        double assigned = 0.0;
        for (double v : sol.x[c]) {
            if (v < -1e-9) flag("negative assignment for client " + inst.clients[c]);
            assigned += v;
        }
        if (std::abs(assigned - inst.lambda[c]) > 1e-6 * std::max(1.0, inst.lambda[c]))
            flag("demand: client " + inst.clients[c] + " assigned " + std::to_string(assigned) +
                 " of " + std::to_string(inst.lambda[c]));
    }
    int total_y = 0;
    for (std::size_t f = 0; f < F; ++f) {
        if (sol.y[f] < 0) flag("negative allocation at facility " + inst.facilities[f]);
        if (sol.y[f] > inst.k[f])
            flag("count: facility " + inst.facilities[f] + " allocated " + std::to_string(sol.y[f]) +
                 " > capacity " + std::to_string(inst.k[f]));
        const double cap = kCapacityCap * inst.mu[f] * sol.y[f];
        const double load = sol.load(f);
        if (load > cap + 1e-6 * std::max(1.0, cap))
            flag("capacity: facility " + inst.facilities[f] + " load " + std::to_string(load) +
                 " > " + std::to_string(cap));
        total_y += sol.y[f];
    }
    if (total_y != inst.p)
        flag("limit: total allocation " + std::to_string(total_y) + " != budget " + std::to_string(inst.p));
    return rep;
}

double evaluate(const Instance& inst, const Solution& sol) {
    auto rep = validate(inst, sol);
    if (!rep.ok) throw std::invalid_argument("infeasible solution: " + rep.violations.front());
    const double total = inst.total_demand();
    if (total <= 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t c = 0; c < inst.n_clients(); ++c)
        for (std::size_t f = 0; f < inst.n_facilities(); ++f) acc += sol.x[c][f] * inst.latency_ms[c][f];
    for (std::size_t f = 0; f < inst.n_facilities(); ++f) {
        const double load = sol.load(f);
        if (load <= 1e-12) continue;  // idle facility: lambda * T -> 0
        acc += 1000.0 * load * qflp::queueing::t_system(load, inst.mu[f], sol.y[f]);
    }
    return acc / total;
}

std::vector<double> gen_demand(std::size_t n_nodes, DemandDist dist, double per_node_mean,
                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(n_nodes);
    std::normal_distribution<double> n1(per_node_mean, per_node_mean / 20.0);
    std::normal_distribution<double> n2(per_node_mean, per_node_mean);
    std::exponential_distribution<double> ex(1.0 / per_node_mean);
    for (auto& v : out) {
        switch (dist) {
            case DemandDist::N1: v = n1(rng); break;
            case DemandDist::N2: v = n2(rng); break;
            case DemandDist::Exp: v = ex(rng); break;
        }
        v = std::max(0.0, v);
    }
    return out;
}

double aggregate_demand_mean(const std::vector<int>& k, const std::vector<double>& mu) {
    double cap = 0.0;
    for (std::size_t f = 0; f < k.size(); ++f) cap += k[f] * mu[f];
    return 0.5 * kCapacityCap * cap;
}

namespace {

// proportional shares with largest-remainder rounding; exact total
std::vector<int> apportion(const std::vector<double>& weight, int total) {
    const std::size_t n = weight.size();
    const double wsum = std::accumulate(weight.begin(), weight.end(), 0.0);
    std::vector<int> out(n, 0);
    if (wsum <= 0.0) throw std::invalid_argument("distribute_resources: all weights zero");
    std::vector<std::pair<double, std::size_t>> rem;
    int assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double share = total * weight[i] / wsum;
        out[i] = static_cast<int>(std::floor(share));
        assigned += out[i];
        rem.push_back({share - out[i], i});
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;  // lower node id wins ties
    });
    for (int i = 0; i < total - assigned; ++i) out[rem[i].second] += 1;
    return out;
}

}  // namespace

std::vector<int> distribute_resources(const std::vector<int>& degrees,
                                      const std::vector<std::vector<double>>& rtt,
                                      ResourceScheme scheme, int k_total) {
    const std::size_t n = degrees.size();
    std::vector<int> out(n, 0);
    switch (scheme) {
        case ResourceScheme::d5: {
            if (n < 5) throw std::invalid_argument("scheme d5 needs at least 5 nodes");
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                if (degrees[a] != degrees[b]) return degrees[a] > degrees[b];
                return a < b;
            });
            const int base = k_total / 5, extra = k_total % 5;
            for (int i = 0; i < 5; ++i) out[idx[i]] = base + (i < extra ? 1 : 0);
            return out;
        }
        case ResourceScheme::d: {
            std::vector<double> w(degrees.begin(), degrees.end());
            return apportion(w, k_total);
        }
        case ResourceScheme::d2: {
            std::vector<double> w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(degrees[i]) * degrees[i];
            return apportion(w, k_total);
        }
        case ResourceScheme::c: {
            if (rtt.size() != n) throw std::invalid_argument("scheme c needs the RTT matrix");
            std::size_t best = 0;
            double best_sum = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                const double s = std::accumulate(rtt[i].begin(), rtt[i].end(), 0.0);
                if (s < best_sum) {
                    best_sum = s;
                    best = i;
                }
            }
            out[best] = k_total;
            return out;
        }
        case ResourceScheme::x:
            std::fill(out.begin(), out.end(), 100);
            return out;
    }
    throw std::logic_error("unknown resource scheme");
}

int budget_from_factor(const std::vector<int>& k, double a) {
    if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("budget factor must be in (0, 1]");
    const int total = std::accumulate(k.begin(), k.end(), 0);
    return static_cast<int>(std::ceil(a * total - 1e-12));
}

std::string instance_to_json(const Instance& inst) {
    nlohmann::json out;
    out["clients"] = inst.clients;
    out["facilities"] = inst.facilities;
    out["latency_ms"] = inst.latency_ms;
    out["lambda"] = inst.lambda;
    out["mu"] = inst.mu;
    out["k"] = inst.k;
    out["p"] = inst.p;
    return out.dump(2);
}

Instance instance_from_json(const std::string& text) {
    const auto in = nlohmann::json::parse(text);
    Instance inst;
    inst.clients = in.at("clients").get<std::vector<std::string>>();
    inst.facilities = in.at("facilities").get<std::vector<std::string>>();
    inst.latency_ms = in.at("latency_ms").get<std::vector<std::vector<double>>>();
    inst.lambda = in.at("lambda").get<std::vector<double>>();
    inst.mu = in.at("mu").get<std::vector<double>>();
    inst.k = in.at("k").get<std::vector<int>>();
    inst.p = in.at("p").get<int>();
    inst.check();
    return inst;
}

std::string solution_to_json(const Solution& sol) {
    nlohmann::json out;
    out["x"] = sol.x;
    out["y"] = sol.y;
    out["objective_ms"] = sol.objective_ms;
    return out.dump(2);
}

Solution solution_from_json(const std::string& text) {
    const auto in = nlohmann::json::parse(text);
    Solution sol;
    sol.x = in.at("x").get<std::vector<std::vector<double>>>();
    sol.y = in.at("y").get<std::vector<int>>();
    sol.objective_ms = in.value("objective_ms", 0.0);
    return sol;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text << '\n';
}

}  // namespace

void save_instance(const Instance& inst, const std::string& path) { write_file(path, instance_to_json(inst)); }
Instance load_instance(const std::string& path) { return instance_from_json(read_file(path)); }
void save_solution(const Solution& sol, const std::string& path) { write_file(path, solution_to_json(sol)); }
Solution load_solution(const std::string& path) { return solution_from_json(read_file(path)); }

}  // namespace qflp::model
