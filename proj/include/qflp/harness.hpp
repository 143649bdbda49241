#pragma once

#include "qflp/ingestion.hpp"
#include "qflp/milp.hpp"
#include "qflp/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Experiment runner: approach dispatch by name, scenario-grid expansion,
// durable CSV result logs, and quality-ratio / ECDF summaries.
namespace qflp::harness {

// One solver run. The objective is present exactly when the status is
// "optimal" or "feasible-with-gap", and it is always the exact queueing
// evaluation of the extracted solution, never a linearised surrogate.
struct RunRecord {
    std::string instance_id;
    std::string approach;
    std::optional<double> objective_ms;
    double wall_s = 0.0;
    std::string status;  // optimal | feasible-with-gap | infeasible | timeout | error
    std::optional<double> gap;

    bool operator==(const RunRecord& other) const;
};

// CSV with header instance_id,approach,objective_ms,wall_s,status,gap.
// Doubles use shortest round-trip formatting; parse(emit(x)) == x.
std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& text);

// Appends one record to the file (header written first when the file is new
// or empty) and flushes, so an interrupted grid keeps everything finished.
void append_record(const std::string& path, const RunRecord& record);
std::vector<RunRecord> load_records(const std::string& path);

// Approach names: "oracle", "genetic", "curves-full", and the set-qualified
// "curves-thinned:<m>,<J>", "tri-plus:<m>,<J>", "tri-minus:<m>,<J>",
// "quad:<m>,<J>" with <J> one of 2^i / 3^i / 4^i / k100, e.g. "quad:6,4^i".
// curves-full is shorthand for every server count with 30 basepoints.
bool is_known_approach(const std::string& approach);

struct ApproachRun {
    model::Solution solution;
    std::string status;          // optimal | feasible-with-gap
    std::optional<double> gap;   // worst proven gap over the solver calls
};

// Runs one approach on one instance. MILP formulations are solved through
// the budget-restoring search post-processor, so the returned allocation is
// integer with sum y = p; the objective is re-evaluated exactly. The solver
// adapter may be null for the non-MILP approaches. Throws on unknown
// approach names, guard violations, and infeasibility.
ApproachRun run_approach(const model::Instance& inst, const std::string& approach,
                         milp::SolverAdapter* solver, const milp::SolveOptions& opts,
                         std::uint64_t seed = 0);

// Scenario factor grid. Cells are the Cartesian product topology x demand
// distribution x placement scheme x budget factor x seed; every cell is
// solved by every approach, so the record count is #cells * #approaches.
struct GridConfig {
    std::vector<std::pair<std::string, ingestion::Topology>> topologies;
    std::vector<model::DemandDist> demand_dists;
    std::vector<model::ResourceScheme> schemes;
    std::vector<double> budget_factors;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> approaches;

    int k_total = 100;          // servers distributed by the placement scheme
    double mu_per_server = 10;  // requests/second per server
    milp::SolveOptions options;
    int workers = 1;
};

// One instance from a topology: clients at every node, facilities where the
// scheme places servers, latencies from all-pairs RTT, demand drawn at half
// the usable capacity (deterministic per seed).
model::Instance instance_from_topology(const ingestion::Topology& topo,
                                       const model::ScenarioConfig& scenario, int k_total,
                                       double mu_per_server);

struct GridCell {
    std::string instance_id;
    model::Instance instance;
    std::uint64_t seed = 0;
};

std::vector<GridCell> expand_grid(const GridConfig& grid);

// Runs every (cell, approach) pair not already present in the CSV at path,
// appending each record as it finishes. Per-run failures become "error"
// records and never abort the grid. Returns all records, resumed and new.
std::vector<RunRecord> run_experiment(const GridConfig& grid, const std::string& csv_path);

struct QualityRatio {
    std::string approach;     // numerator
    std::string instance_id;  // shared instance
    double ratio = 0.0;       // approach objective / baseline objective
};

struct Quantiles {
    double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
};

struct RatioReport {
    std::string baseline;
    std::vector<QualityRatio> ratios;  // ordered by approach, then instance
    // per approach: ECDF as sorted (ratio, fraction of instances <= ratio)
    std::map<std::string, std::vector<std::pair<double, double>>> ecdf;
    std::map<std::string, Quantiles> quantiles;
    std::size_t skipped = 0;  // (instance, approach) pairs without both objectives
};

// Per-instance objective ratios of every other approach against the
// baseline; pairs where either run lacks an objective are skipped.
RatioReport quality_ratios(const std::vector<RunRecord>& records, const std::string& baseline);

}  // namespace qflp::harness
