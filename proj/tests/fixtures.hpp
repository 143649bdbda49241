#pragma once

#include "qflp/model.hpp"

#include <algorithm>
#include <cstdint>
#include <random>

// Shared test instances.
namespace fixtures {

// Two clients, three facilities, mirrored latencies; f2 is twice as fast
// but farthest from both clients. Budget 5 of 30 total servers.
inline qflp::model::Instance two_client_example(double lambda_a, double lambda_b) {
    qflp::model::Instance inst;
    inst.clients = {"a", "b"};
    inst.facilities = {"f1", "f2", "f3"};
    inst.latency_ms = {{40.0, 100.0, 70.0}, {70.0, 100.0, 40.0}};
    inst.lambda = {lambda_a, lambda_b};
    inst.mu = {60.0, 120.0, 60.0};
    inst.k = {10, 10, 10};
    inst.p = 5;
    return inst;
}

// Small random instance with guaranteed headroom: total demand is drawn
// below 80% of what the budget can serve.
inline qflp::model::Instance random_instance(std::uint64_t seed, int max_facilities = 4,
                                             int max_clients = 5, int k_cap = 8) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nf(2, max_facilities), nc(1, max_clients), kk(1, k_cap);
    std::uniform_real_distribution<double> lat(1.0, 100.0), rate(5.0, 50.0), frac(0.2, 0.8);
    qflp::model::Instance inst;
    const int F = nf(rng), C = nc(rng);
    for (int f = 0; f < F; ++f) {
        inst.facilities.push_back("f" + std::to_string(f));
        inst.mu.push_back(rate(rng));
        inst.k.push_back(kk(rng));
    }
    for (int c = 0; c < C; ++c) {
        inst.clients.push_back("c" + std::to_string(c));
        inst.latency_ms.emplace_back();
        for (int f = 0; f < F; ++f) inst.latency_ms.back().push_back(lat(rng));
    }
    int total_k = 0;
    for (int v : inst.k) total_k += v;
    while (total_k > 30) {  // keep within the brute-force enumeration guard
        auto it = std::max_element(inst.k.begin(), inst.k.end());
        --*it;
        --total_k;
    }
    std::uniform_int_distribution<int> pp((total_k + 1) / 2, total_k);
    inst.p = pp(rng);
    // serveable rate under the chosen budget, pessimistically assuming the
    // budget lands on the slowest facilities first
    std::vector<std::pair<double, int>> by_mu;
    for (int f = 0; f < F; ++f) by_mu.push_back({inst.mu[f], inst.k[f]});
    std::sort(by_mu.begin(), by_mu.end());
    double serveable = 0.0;
    int left = inst.p;
    for (auto [m, cap] : by_mu) {
        const int used = std::min(cap, left);
        serveable += 0.98 * m * used;
        left -= used;
        if (left == 0) break;
    }
    const double total_demand = frac(rng) * serveable;
    std::vector<double> split(C);
    double s = 0.0;
    for (auto& v : split) s += (v = std::uniform_real_distribution<double>(0.2, 1.0)(rng));
    for (int c = 0; c < C; ++c) inst.lambda.push_back(total_demand * split[c] / s);
    return inst;
}

}  // namespace fixtures
