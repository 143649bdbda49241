#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Problem-instance data model: exact objective evaluation, feasibility
// validation, and scenario generation (demand draws, resource placement).
namespace qflp::model {

// Steady-state headroom: assignable load is capped at this fraction of the
// aggregate service rate, both in validation and in every formulation.
constexpr double kCapacityCap = 0.98;

struct Instance {
    std::vector<std::string> clients;
    std::vector<std::string> facilities;
    std::vector<std::vector<double>> latency_ms;  // [client][facility]
    std::vector<double> lambda;                   // requests/second per client
    std::vector<double> mu;                       // requests/second per facility
    std::vector<int> k;                           // max servers per facility
    int p = 0;                                    // total servers to place

    std::size_t n_clients() const { return clients.size(); }
    std::size_t n_facilities() const { return facilities.size(); }
    double total_demand() const;
    int total_capacity() const;

    // Shape/sign checks; throws std::invalid_argument on malformed data.
    void check() const;
};

struct Solution {
    std::vector<std::vector<double>> x;  // [client][facility] assigned rate
    std::vector<int> y;                  // servers per facility
    double objective_ms = 0.0;

    double load(std::size_t f) const;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
};

enum class DemandDist { N1, N2, Exp };
enum class ResourceScheme { d5, d, d2, c, x };

struct ScenarioConfig {
    DemandDist demand_dist = DemandDist::N1;
    ResourceScheme resource_scheme = ResourceScheme::d;
    double budget_factor = 1.0;  // in (0.5, 1]
    std::uint64_t seed = 0;
};

// Average response time in ms: (sum x*l + 1000 * sum lambda_f * T_f) / sum
// lambda, with T_f the exact M/M/y_f time in system in seconds. Facilities
// with zero assigned load contribute zero. Throws std::invalid_argument
// naming the first violated constraint if the solution is infeasible.
double evaluate(const Instance& inst, const Solution& sol);

// Checks demand conservation, the 0.98 capacity cap, y <= k, and sum y = p;
// reports every violation instead of stopping at the first.
ValidationReport validate(const Instance& inst, const Solution& sol);

// One demand draw per node: max(0, X) with X from N(mean, mean/20),
// N(mean, mean), or Exp(mean). Deterministic per seed.
std::vector<double> gen_demand(std::size_t n_nodes, DemandDist dist, double per_node_mean,
                               std::uint64_t seed);

// Aggregate demand target: half of the usable (0.98-capped) service capacity.
double aggregate_demand_mean(const std::vector<int>& k, const std::vector<double>& mu);

// Server placement over the topology. d5: k_total split evenly over the 5
// highest-degree nodes; d / d2: proportional to degree / degree squared with
// largest-remainder rounding; c: everything on the node with the smallest
// total RTT to all nodes; x: 100 everywhere (ignores k_total). Ties break on
// the lower node id.
std::vector<int> distribute_resources(const std::vector<int>& degrees,
                                      const std::vector<std::vector<double>>& rtt,
                                      ResourceScheme scheme, int k_total);

// p = ceil(a * sum k).
int budget_from_factor(const std::vector<int>& k, double a);

std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

std::string solution_to_json(const Solution& sol);
Solution solution_from_json(const std::string& text);
void save_solution(const Solution& sol, const std::string& path);
Solution load_solution(const std::string& path);

}  // namespace qflp::model
