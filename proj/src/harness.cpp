#include "qflp/harness.hpp"

#include "qflp/formulations.hpp"
#include "qflp/greedy.hpp"
#include "qflp/heuristic.hpp"
#include "qflp/oracle.hpp"
#include "qflp/pwl.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qflp::harness {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("csv: cannot format double");
    return std::string(buf, ptr);
}

double parse_double(const std::string& s, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument(std::string("csv: bad ") + what + " value '" + s + "'");
    return v;
}

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote(const std::string& field) {
    if (!needs_quoting(field)) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Splits CSV text into rows of fields, honoring quoted fields (which may
// contain commas, doubled quotes, and newlines).
std::vector<std::vector<std::string>> split_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            in_quotes = true;
            row_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            row_started = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (row_started || !field.empty()) {
                row.push_back(std::move(field));
                field.clear();
                rows.push_back(std::move(row));
                row.clear();
                row_started = false;
            }
        } else {
            field += c;
            row_started = true;
        }
    }
    if (in_quotes) throw std::invalid_argument("csv: unterminated quoted field");
    if (row_started || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

constexpr const char* kCsvHeader = "instance_id,approach,objective_ms,wall_s,status,gap";

std::string record_line(const RunRecord& r) {
    std::string line = quote(r.instance_id) + ',' + quote(r.approach) + ',';
    if (r.objective_ms) line += fmt_double(*r.objective_ms);
    line += ',' + fmt_double(r.wall_s) + ',' + quote(r.status) + ',';
    if (r.gap) line += fmt_double(*r.gap);
    return line;
}

RunRecord record_from_fields(const std::vector<std::string>& f) {
    if (f.size() != 6) throw std::invalid_argument("csv: expected 6 columns per record");
    RunRecord r;
    r.instance_id = f[0];
    r.approach = f[1];
    if (!f[2].empty()) r.objective_ms = parse_double(f[2], "objective_ms");
    r.wall_s = parse_double(f[3], "wall_s");
    r.status = f[4];
    if (!f[5].empty()) r.gap = parse_double(f[5], "gap");
    return r;
}

struct ApproachSpec {
    enum class Kind { Oracle, Genetic, CurvesFull, CurvesThinned, TriPlus, TriMinus, Quad };
    Kind kind = Kind::Oracle;
    int m = 0;             // basepoints per curve (set-qualified kinds)
    std::string set_name;  // J shorthand (set-qualified kinds)
};

std::optional<ApproachSpec> parse_approach(const std::string& approach) {
    using Kind = ApproachSpec::Kind;
    if (approach == "oracle") return ApproachSpec{Kind::Oracle, 0, ""};
    if (approach == "genetic") return ApproachSpec{Kind::Genetic, 0, ""};
    if (approach == "curves-full") return ApproachSpec{Kind::CurvesFull, 30, "k100"};

    const auto colon = approach.find(':');
    if (colon == std::string::npos) return std::nullopt;
    const std::string head = approach.substr(0, colon);
    Kind kind;
    if (head == "curves-thinned") kind = Kind::CurvesThinned;
    else if (head == "tri-plus") kind = Kind::TriPlus;
    else if (head == "tri-minus") kind = Kind::TriMinus;
    else if (head == "quad") kind = Kind::Quad;
    else return std::nullopt;

    const std::string spec = approach.substr(colon + 1);
    const auto comma = spec.find(',');
    if (comma == std::string::npos) return std::nullopt;
    int m = 0;
    const std::string m_text = spec.substr(0, comma);
    auto [ptr, ec] = std::from_chars(m_text.data(), m_text.data() + m_text.size(), m);
    if (ec != std::errc() || ptr != m_text.data() + m_text.size() || m < 4) return std::nullopt;
    const std::string set_name = spec.substr(comma + 1);
    if (set_name != "2^i" && set_name != "3^i" && set_name != "4^i" && set_name != "k100")
        return std::nullopt;
    return ApproachSpec{kind, m, set_name};
}

ApproachRun run_formulation_approach(const model::Instance& inst, const ApproachSpec& spec,
                                     milp::SolverAdapter& solver, const milp::SolveOptions& opts) {
    using Kind = ApproachSpec::Kind;
    const int k_max = *std::max_element(inst.k.begin(), inst.k.end());
    auto set = pwl::make_standard_set(spec.set_name, k_max, spec.m);

    // Worst solver outcome over the budget-search calls.
    bool any_gap = false;
    double worst_gap = 0.0;

    greedy::SolveAt solve_at = [&](int budget) {
        model::Instance at = inst;
        at.p = budget;
        formulations::BuiltFormulation built;
        switch (spec.kind) {
            case Kind::CurvesFull: {
                std::vector<int> all(static_cast<std::size_t>(k_max));
                std::iota(all.begin(), all.end(), 1);
                built = formulations::build_thinned_curves(at, set, all);
                break;
            }
            case Kind::CurvesThinned:
                built = formulations::build_thinned_curves(at, set, set.J);
                break;
            case Kind::TriPlus:
                built = formulations::build_triangle_surface(at, set, pwl::Orientation::TrianglePlus);
                break;
            case Kind::TriMinus:
                built =
                    formulations::build_triangle_surface(at, set, pwl::Orientation::TriangleMinus);
                break;
            case Kind::Quad:
                built = formulations::build_quad_surface(at, set);
                break;
            default:
                throw std::logic_error("not a formulation approach");
        }
        if (built.kind == formulations::Kind::ThinnedCurves) formulations::drop_convex_sos2(built);
        auto res = formulations::solve_formulation(built, at, solver, opts);
        if (res.status == milp::SolveStatus::FeasibleWithGap) {
            any_gap = true;
            worst_gap = std::max(worst_gap, res.gap);
        }
        return res;
    };

    ApproachRun run;
    run.solution = greedy::search(inst, solve_at, inst.p);
    run.status = any_gap ? "feasible-with-gap" : "optimal";
    if (any_gap) run.gap = worst_gap;
    return run;
}

const char* dist_name(model::DemandDist d) {
    switch (d) {
        case model::DemandDist::N1: return "n1";
        case model::DemandDist::N2: return "n2";
        case model::DemandDist::Exp: return "exp";
    }
    return "?";
}

const char* scheme_name(model::ResourceScheme s) {
    switch (s) {
        case model::ResourceScheme::d5: return "d5";
        case model::ResourceScheme::d: return "d";
        case model::ResourceScheme::d2: return "d2";
        case model::ResourceScheme::c: return "c";
        case model::ResourceScheme::x: return "x";
    }
    return "?";
}

}  // namespace

bool RunRecord::operator==(const RunRecord& other) const {
    return instance_id == other.instance_id && approach == other.approach &&
           objective_ms == other.objective_ms && wall_s == other.wall_s &&
           status == other.status && gap == other.gap;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
    std::string out = std::string(kCsvHeader) + '\n';
    for (const auto& r : records) out += record_line(r) + '\n';
    return out;
}

std::vector<RunRecord> records_from_csv(const std::string& text) {
    auto rows = split_csv(text);
    if (rows.empty()) throw std::invalid_argument("csv: missing header row");
    std::vector<RunRecord> records;
    for (std::size_t i = 1; i < rows.size(); ++i) records.push_back(record_from_fields(rows[i]));
    return records;
}

void append_record(const std::string& path, const RunRecord& record) {
    const bool fresh =
        !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open results file: " + path);
    if (fresh) out << kCsvHeader << '\n';
    out << record_line(record) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write failed on results file: " + path);
}

std::vector<RunRecord> load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {};
    std::ostringstream text;
    text << in.rdbuf();
    if (text.str().empty()) return {};
    return records_from_csv(text.str());
}

bool is_known_approach(const std::string& approach) {
    return parse_approach(approach).has_value();
}

ApproachRun run_approach(const model::Instance& inst, const std::string& approach,
                         milp::SolverAdapter* solver, const milp::SolveOptions& opts,
                         std::uint64_t seed) {
    const auto spec = parse_approach(approach);
    if (!spec) throw std::invalid_argument("unknown approach: " + approach);

    ApproachRun run;
    switch (spec->kind) {
        case ApproachSpec::Kind::Oracle:
            run.solution = oracle::oracle_solve(inst);
            run.status = "optimal";
            run.gap = 0.0;
            break;
        case ApproachSpec::Kind::Genetic: {
            heuristic::GeneticConfig config;
            config.seed = seed;
            run.solution = heuristic::genetic(inst, inst.p, config);
            run.status = "feasible-with-gap";  // no optimality proof
            break;
        }
        default:
            if (solver == nullptr)
                throw std::invalid_argument("approach '" + approach + "' needs a MILP solver");
            run = run_formulation_approach(inst, *spec, *solver, opts);
            break;
    }
    // The recorded number is always the exact evaluation of the extracted
    // solution, independent of any internal linearised objective.
    run.solution.objective_ms = model::evaluate(inst, run.solution);
    return run;
}

model::Instance instance_from_topology(const ingestion::Topology& topo,
                                       const model::ScenarioConfig& scenario, int k_total,
                                       double mu_per_server) {
    const auto rtt = ingestion::all_pairs_rtt(topo);
    const auto deg = ingestion::degrees(topo);
    const auto placed = model::distribute_resources(deg, rtt, scenario.resource_scheme, k_total);

    model::Instance inst;
    for (const auto& node : topo.nodes) inst.clients.push_back(node.id);
    for (std::size_t f = 0; f < placed.size(); ++f) {
        if (placed[f] == 0) continue;
        inst.facilities.push_back(topo.nodes[f].id);
        inst.k.push_back(placed[f]);
        inst.mu.push_back(mu_per_server);
    }
    inst.latency_ms.assign(inst.n_clients(), {});
    for (std::size_t c = 0; c < inst.n_clients(); ++c)
        for (std::size_t f = 0; f < placed.size(); ++f)
            if (placed[f] > 0) inst.latency_ms[c].push_back(rtt[c][f]);

    const double mean_total = model::aggregate_demand_mean(inst.k, inst.mu);
    inst.lambda = model::gen_demand(inst.n_clients(), scenario.demand_dist,
                                    mean_total / static_cast<double>(inst.n_clients()),
                                    scenario.seed);
    inst.p = model::budget_from_factor(inst.k, scenario.budget_factor);
    inst.check();
    return inst;
}

std::vector<GridCell> expand_grid(const GridConfig& grid) {
    std::vector<GridCell> cells;
    for (const auto& [topo_name, topo] : grid.topologies)
        for (const auto dist : grid.demand_dists)
            for (const auto scheme : grid.schemes)
                for (const double budget : grid.budget_factors)
                    for (const auto seed : grid.seeds) {
                        model::ScenarioConfig scenario{dist, scheme, budget, seed};
                        GridCell cell;
                        std::ostringstream id;
                        id << topo_name << '-' << dist_name(dist) << '-' << scheme_name(scheme)
                           << "-b" << fmt_double(budget) << "-s" << seed;
                        cell.instance_id = id.str();
                        cell.instance =
                            instance_from_topology(topo, scenario, grid.k_total, grid.mu_per_server);
                        cell.seed = seed;
                        cells.push_back(std::move(cell));
                    }
    return cells;
}

std::vector<RunRecord> run_experiment(const GridConfig& grid, const std::string& csv_path) {
    for (const auto& approach : grid.approaches)
        if (!is_known_approach(approach))
            throw std::invalid_argument("unknown approach: " + approach);

    const auto cells = expand_grid(grid);
    auto records = load_records(csv_path);
    std::vector<std::string> done;
    for (const auto& r : records) done.push_back(r.instance_id + '\x1f' + r.approach);
    std::sort(done.begin(), done.end());

    struct Job {
        const GridCell* cell;
        const std::string* approach;
    };
    std::vector<Job> jobs;
    for (const auto& cell : cells)
        for (const auto& approach : grid.approaches)
            if (!std::binary_search(done.begin(), done.end(),
                                    cell.instance_id + '\x1f' + approach))
                jobs.push_back({&cell, &approach});

    std::vector<RunRecord> fresh(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex csv_mutex;

    auto worker = [&] {
        auto solver = milp::make_solver();
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
            const auto& job = jobs[i];
            RunRecord rec;
            rec.instance_id = job.cell->instance_id;
            rec.approach = *job.approach;
            const auto start = std::chrono::steady_clock::now();
            try {
                auto run = run_approach(job.cell->instance, *job.approach, solver.get(),
                                        grid.options, job.cell->seed);
                rec.objective_ms = run.solution.objective_ms;
                rec.status = run.status;
                rec.gap = run.gap;
            } catch (const std::exception&) {
                rec.status = "error";
            }
            rec.wall_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (rec.status == "error" && rec.wall_s >= grid.options.time_limit_s)
                rec.status = "timeout";
            {
                std::lock_guard<std::mutex> lock(csv_mutex);
                append_record(csv_path, rec);
            }
            fresh[i] = std::move(rec);
        }
    };

    const int n_workers = std::max(1, grid.workers);
    if (n_workers == 1 || jobs.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min<std::size_t>(n_workers, jobs.size()); ++w)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    records.insert(records.end(), fresh.begin(), fresh.end());
    return records;
}

RatioReport quality_ratios(const std::vector<RunRecord>& records, const std::string& baseline) {
    RatioReport report;
    report.baseline = baseline;

    // First objective seen per (approach, instance).
    std::map<std::string, std::map<std::string, double>> objective;
    std::map<std::string, std::vector<std::string>> seen;  // approach -> instance ids in order
    for (const auto& r : records) {
        auto& per_instance = seen[r.approach];
        if (std::find(per_instance.begin(), per_instance.end(), r.instance_id) !=
            per_instance.end())
            continue;
        per_instance.push_back(r.instance_id);
        if (r.objective_ms) objective[r.approach][r.instance_id] = *r.objective_ms;
    }

    const auto base_it = objective.find(baseline);
    for (const auto& [approach, instances] : seen) {
        if (approach == baseline) continue;
        std::vector<double> ratios;
        auto sorted = instances;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& id : sorted) {
            const auto& own = objective[approach];
            const auto own_it = own.find(id);
            if (own_it == own.end() || base_it == objective.end() ||
                !base_it->second.contains(id)) {
                ++report.skipped;
                continue;
            }
            const double ratio = own_it->second / base_it->second.at(id);
            report.ratios.push_back({approach, id, ratio});
            ratios.push_back(ratio);
        }
        if (ratios.empty()) continue;
        std::sort(ratios.begin(), ratios.end());
        auto& steps = report.ecdf[approach];
        const double n = static_cast<double>(ratios.size());
        for (std::size_t i = 0; i < ratios.size(); ++i)
            steps.emplace_back(ratios[i], static_cast<double>(i + 1) / n);
        auto quantile = [&](double q) {
            const double pos = q * (ratios.size() - 1);
            const std::size_t lo = static_cast<std::size_t>(pos);
            const std::size_t hi = std::min(lo + 1, ratios.size() - 1);
            return std::lerp(ratios[lo], ratios[hi], pos - static_cast<double>(lo));
        };
        report.quantiles[approach] = {ratios.front(), quantile(0.25), quantile(0.5),
                                      quantile(0.75), ratios.back()};
    }
    return report;
}

}  // namespace qflp::harness
