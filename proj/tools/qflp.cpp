#include "CLI11.hpp"
#include "json.hpp"
#include "qflp/harness.hpp"
#include "qflp/ingestion.hpp"
#include "qflp/milp.hpp"
#include "qflp/model.hpp"
#include "qflp/oracle.hpp"
#include "qflp/pwl.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace qflp;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string stem_of(const std::string& path) {
    auto slash = path.find_last_of("/\\");
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = name.find_last_of('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

// Format sniffing: XML markup, SNDlib section headers, else latency triples.
ingestion::Topology load_topology(const std::string& path) {
    const auto text = read_file(path);
    const auto start = text.find_first_not_of(" \t\r\n");
    ingestion::Topology topo;
    if (start != std::string::npos && text[start] == '<')
        topo = ingestion::parse_graphml_topology(text);
    else if (text.find("NODES (") != std::string::npos ||
             text.find("NODES(") != std::string::npos)
        topo = ingestion::parse_sndlib_topology(text);
    else
        topo = ingestion::parse_latency_matrix(text);
    topo.name = stem_of(path);
    for (const auto& warning : topo.warnings) std::cerr << "warning: " << warning << '\n';
    if (topo.removed_nodes > 0)
        std::cerr << "note: removed " << topo.removed_nodes << " node(s) without coordinates\n";
    if (topo.removed_components > 0)
        std::cerr << "note: discarded " << topo.removed_components << " smaller component(s)\n";
    return topo;
}

model::DemandDist dist_from_name(const std::string& name) {
    if (name == "n1") return model::DemandDist::N1;
    if (name == "n2") return model::DemandDist::N2;
    if (name == "exp") return model::DemandDist::Exp;
    throw std::invalid_argument("unknown demand distribution: " + name +
                                " (expected n1, n2, or exp)");
}

model::ResourceScheme scheme_from_name(const std::string& name) {
    if (name == "d5") return model::ResourceScheme::d5;
    if (name == "d") return model::ResourceScheme::d;
    if (name == "d2") return model::ResourceScheme::d2;
    if (name == "c") return model::ResourceScheme::c;
    if (name == "x") return model::ResourceScheme::x;
    throw std::invalid_argument("unknown placement scheme: " + name +
                                " (expected d5, d, d2, c, or x)");
}

void print_solution(const model::Instance& inst, const model::Solution& sol) {
    std::printf("objective_ms: %.6f\n", sol.objective_ms);
    std::printf("allocation:");
    for (std::size_t f = 0; f < sol.y.size(); ++f)
        std::printf(" %s=%d", inst.facilities[f].c_str(), sol.y[f]);
    std::printf("\n");
}

harness::GridConfig grid_from_json(const std::string& text) {
    const auto j = json::parse(text);
    harness::GridConfig grid;
    for (const auto& entry : j.at("topologies")) {
        const std::string path = entry.get<std::string>();
        grid.topologies.emplace_back(stem_of(path), load_topology(path));
    }
    for (const auto& name : j.at("demand_dists"))
        grid.demand_dists.push_back(dist_from_name(name.get<std::string>()));
    for (const auto& name : j.value("schemes", std::vector<std::string>{"d"}))
        grid.schemes.push_back(scheme_from_name(name));
    grid.budget_factors = j.at("budget_factors").get<std::vector<double>>();
    grid.seeds = j.value("seeds", std::vector<std::uint64_t>{0});
    grid.approaches = j.at("approaches").get<std::vector<std::string>>();
    grid.k_total = j.value("k_total", 100);
    grid.mu_per_server = j.value("mu_per_server", 10.0);
    grid.options.time_limit_s = j.value("time_limit_s", 120.0);
    grid.options.mip_gap = j.value("mip_gap", 1e-6);
    grid.workers = j.value("workers", 1);
    return grid;
}

int run(int argc, char** argv) {
    CLI::App app{"Queue-aware facility location: MILP linearisations, greedy "
                 "post-processing, a genetic heuristic, and a brute-force reference"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "Solve one instance with a named approach");
    std::string solve_instance, solve_approach = "quad:6,4^i", solve_out;
    int solve_p = -1;
    std::uint64_t solve_seed = 0;
    double time_limit = 120.0, mip_gap = 1e-6;
    solve->add_option("--instance", solve_instance, "Instance JSON file")->required();
    solve->add_option("--approach", solve_approach,
                      "oracle | genetic | curves-full | curves-thinned:<m>,<J> | "
                      "tri-plus:<m>,<J> | tri-minus:<m>,<J> | quad:<m>,<J>");
    solve->add_option("--p", solve_p, "Override the server budget");
    solve->add_option("--seed", solve_seed, "Heuristic seed");
    solve->add_option("--time-limit", time_limit, "Per-solve time limit (s)");
    solve->add_option("--mip-gap", mip_gap, "Relative MIP gap target");
    solve->add_option("--out", solve_out, "Write the solution JSON here");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive reference solve (small instances)");
    std::string oracle_instance, oracle_out;
    oracle_cmd->add_option("--instance", oracle_instance, "Instance JSON file")->required();
    oracle_cmd->add_option("--out", oracle_out, "Write the solution JSON here");

    // compare
    auto* compare = app.add_subcommand("compare", "Run an experiment grid into a results CSV");
    std::string grid_path, compare_out, baseline;
    compare->add_option("--grid", grid_path, "Grid JSON file")->required();
    compare->add_option("--out", compare_out, "Results CSV (appended; resumes)")->required();
    compare->add_option("--baseline", baseline,
                        "Also print objective-ratio quantiles against this approach");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate an instance from a topology");
    std::string gen_topology, gen_scheme = "d", gen_demand = "n1", gen_out;
    std::uint64_t gen_seed = 0;
    double gen_budget = 1.0, gen_mu = 10.0;
    int gen_k_total = 100;
    gen->add_option("--topology", gen_topology, "Topology file (XML graph, SNDlib, or triples)")
        ->required();
    gen->add_option("--scheme", gen_scheme, "Placement scheme: d5 | d | d2 | c | x");
    gen->add_option("--demand", gen_demand, "Demand distribution: n1 | n2 | exp");
    gen->add_option("--seed", gen_seed, "Demand seed");
    gen->add_option("--budget-factor", gen_budget, "p as a fraction of total capacity (0.5, 1]");
    gen->add_option("--k-total", gen_k_total, "Servers to distribute");
    gen->add_option("--mu", gen_mu, "Service rate per server (req/s)");
    gen->add_option("--out", gen_out, "Write the instance JSON here")->required();

    // basepoints
    auto* basepoints = app.add_subcommand("basepoints", "Generate a basepoint set");
    std::string set_spec = "8,3^i", bp_out;
    int kmax = 100;
    basepoints->add_option("--kmax", kmax, "Largest server count");
    basepoints->add_option("--set", set_spec, "<m>,<J> with J one of 2^i, 3^i, 4^i, k100");
    basepoints->add_option("--out", bp_out, "Write the basepoint set JSON here")->required();

    CLI11_PARSE(app, argc, argv);

    if (solve->parsed()) {
        auto inst = model::load_instance(solve_instance);
        if (solve_p >= 0) inst.p = solve_p;
        auto solver = milp::make_solver();
        auto run = harness::run_approach(inst, solve_approach, solver.get(),
                                         {time_limit, mip_gap}, solve_seed);
        std::printf("status: %s\n", run.status.c_str());
        if (run.gap) std::printf("gap: %g\n", *run.gap);
        print_solution(inst, run.solution);
        if (!solve_out.empty()) model::save_solution(run.solution, solve_out);
    } else if (oracle_cmd->parsed()) {
        auto inst = model::load_instance(oracle_instance);
        auto sol = oracle::oracle_solve(inst);
        print_solution(inst, sol);
        if (!oracle_out.empty()) model::save_solution(sol, oracle_out);
    } else if (compare->parsed()) {
        auto grid = grid_from_json(read_file(grid_path));
        auto records = harness::run_experiment(grid, compare_out);
        std::size_t failures = 0;
        for (const auto& r : records)
            if (!r.objective_ms) ++failures;
        std::printf("%zu record(s) in %s (%zu without an objective)\n", records.size(),
                    compare_out.c_str(), failures);
        if (!baseline.empty()) {
            auto report = harness::quality_ratios(records, baseline);
            for (const auto& [approach, q] : report.quantiles)
                std::printf("%s vs %s: min %.4f  q25 %.4f  median %.4f  q75 %.4f  max %.4f\n",
                            approach.c_str(), baseline.c_str(), q.min, q.q25, q.median, q.q75,
                            q.max);
            if (report.skipped > 0)
                std::printf("skipped %zu record(s) lacking a matching pair\n", report.skipped);
        }
    } else if (gen->parsed()) {
        auto topo = load_topology(gen_topology);
        model::ScenarioConfig scenario{dist_from_name(gen_demand), scheme_from_name(gen_scheme),
                                       gen_budget, gen_seed};
        auto inst = harness::instance_from_topology(topo, scenario, gen_k_total, gen_mu);
        model::save_instance(inst, gen_out);
        std::printf("%s: %zu clients, %zu facilities, p=%d, total demand %.2f req/s\n",
                    gen_out.c_str(), inst.n_clients(), inst.n_facilities(), inst.p,
                    inst.total_demand());
    } else if (basepoints->parsed()) {
        const auto comma = set_spec.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("--set expects <m>,<J>, e.g. 8,3^i");
        const int m = std::stoi(set_spec.substr(0, comma));
        auto set = pwl::make_standard_set(set_spec.substr(comma + 1), kmax, m);
        pwl::save_basepoint_set(set, bp_out);
        std::printf("%s: J of size %zu up to %d, %d basepoints per curve\n", bp_out.c_str(),
                    set.J.size(), set.k_max(), set.m);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
