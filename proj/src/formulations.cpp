#include "qflp/formulations.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace qflp::formulations {

namespace {

using milp::LinTerm;
using milp::MilpModel;
using milp::Sense;

std::string idx2(const char* tag, std::size_t a, std::size_t b) {
    return std::string(tag) + "_" + std::to_string(a) + "_" + std::to_string(b);
}

std::string idx3(const char* tag, std::size_t a, std::size_t b, std::size_t c) {
    return idx2(tag, a, b) + "_" + std::to_string(c);
}

// shared x variables, demand rows, and the latency part of the objective
void add_assignment(BuiltFormulation& bf, const model::Instance& inst) {
    const std::size_t C = inst.n_clients(), F = inst.n_facilities();
    const double total = inst.total_demand();
    bf.x_idx.assign(C, std::vector<int>(F, -1));
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t f = 0; f < F; ++f)
            bf.x_idx[c][f] = bf.model.add_continuous(idx2("x", c, f), 0.0, inst.lambda[c]);
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<LinTerm> row;
        for (std::size_t f = 0; f < F; ++f) row.push_back({bf.x_idx[c][f], 1.0});
        bf.model.add_constraint("demand_" + std::to_string(c), std::move(row), Sense::EQ,
                                inst.lambda[c]);
    }
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t f = 0; f < F; ++f)
            if (inst.latency_ms[c][f] != 0.0)
                bf.model.objective.push_back({bf.x_idx[c][f], inst.latency_ms[c][f] / total});
}

}  // namespace

BuiltFormulation build_thinned_curves(const model::Instance& inst, const pwl::BasepointSet& set,
                                      const std::vector<int>& J) {
    if (J.empty()) throw std::invalid_argument("thinned curves: J must not be empty");
    if (std::find(J.begin(), J.end(), 1) == J.end())
        throw std::invalid_argument("thinned curves: J must contain 1");
    for (int j : J)
        if (std::find(set.J.begin(), set.J.end(), j) == set.J.end())
            throw std::invalid_argument("thinned curves: no curve for j=" + std::to_string(j));

    BuiltFormulation bf;
    bf.kind = Kind::ThinnedCurves;
    bf.J = J;
    add_assignment(bf, inst);
    const std::size_t F = inst.n_facilities();
    const double total = inst.total_demand();

    bf.ydot_idx.assign(F, {});
    std::vector<std::vector<std::vector<int>>> z(F);  // [f][j-pos][i]
    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t jp = 0; jp < J.size(); ++jp) {
            bf.ydot_idx[f].push_back(bf.model.add_binary(idx2("ydot", f, jp)));
            const auto& curve = set.curve_for(J[jp]);
            z[f].emplace_back();
            for (std::size_t i = 0; i < curve.points.size(); ++i)
                z[f].back().push_back(bf.model.add_continuous(idx3("z", f, jp, i), 0.0, 1.0));
        }
    }

    for (std::size_t f = 0; f < F; ++f) {
        // capacity: sum_c x_cf <= mu_f * sum_ji alpha_ji z_fji
        std::vector<LinTerm> cap;
        for (std::size_t c = 0; c < inst.n_clients(); ++c) cap.push_back({bf.x_idx[c][f], 1.0});
        for (std::size_t jp = 0; jp < J.size(); ++jp) {
            const auto& curve = set.curve_for(J[jp]);
            for (std::size_t i = 0; i < curve.points.size(); ++i)
                cap.push_back({z[f][jp][i], -inst.mu[f] * curve.points[i].alpha});
        }
        bf.model.add_constraint("capacity_" + std::to_string(f), std::move(cap), Sense::LE, 0.0);

        // weight sync: sum_i z_fji = ydot_fj, plus the SOS2 ordering
        for (std::size_t jp = 0; jp < J.size(); ++jp) {
            std::vector<LinTerm> sync;
            for (int v : z[f][jp]) sync.push_back({v, 1.0});
            sync.push_back({bf.ydot_idx[f][jp], -1.0});
            bf.model.add_constraint("wsync_" + std::to_string(f) + "_" + std::to_string(jp),
                                    std::move(sync), Sense::EQ, 0.0);
            bf.model.add_sos(2, z[f][jp]);
        }

        // at most one curve per facility
        bf.model.add_sos(1, bf.ydot_idx[f]);

        // count: sum_j j * ydot_fj <= k_f
        std::vector<LinTerm> count;
        for (std::size_t jp = 0; jp < J.size(); ++jp)
            count.push_back({bf.ydot_idx[f][jp], static_cast<double>(J[jp])});
        bf.model.add_constraint("count_" + std::to_string(f), std::move(count), Sense::LE,
                                static_cast<double>(inst.k[f]));
    }

    // budget as an upper bound; the greedy pass restores equality
    std::vector<LinTerm> limit;
    for (std::size_t f = 0; f < F; ++f)
        for (std::size_t jp = 0; jp < J.size(); ++jp)
            limit.push_back({bf.ydot_idx[f][jp], static_cast<double>(J[jp])});
    bf.model.add_constraint("limit", std::move(limit), Sense::LE, static_cast<double>(inst.p));

    // time-in-system term of the objective (theta is dimensionless, ms wants *1000)
    for (std::size_t f = 0; f < F; ++f)
        for (std::size_t jp = 0; jp < J.size(); ++jp) {
            const auto& curve = set.curve_for(J[jp]);
            for (std::size_t i = 0; i < curve.points.size(); ++i)
                if (curve.points[i].theta != 0.0)
                    bf.model.objective.push_back({z[f][jp][i], 1000.0 * curve.points[i].theta / total});
        }

    bf.model.check();
    return bf;
}

namespace {

BuiltFormulation build_surface(const model::Instance& inst, const pwl::BasepointSet& set,
                               pwl::Orientation orientation) {
    if (set.J.size() < 2) throw std::invalid_argument("surface: need at least two curves");
    BuiltFormulation bf;
    bf.kind = orientation == pwl::Orientation::TrianglePlus    ? Kind::TrianglePlus
              : orientation == pwl::Orientation::TriangleMinus ? Kind::TriangleMinus
                                                               : Kind::Quadrilateral;
    add_assignment(bf, inst);
    const std::size_t F = inst.n_facilities();
    const std::size_t rows = set.J.size(), cols = static_cast<std::size_t>(set.m);
    const double total = inst.total_demand();
    auto flat = [&](std::size_t r, std::size_t i) { return r * cols + i; };

    bf.z_beta.assign(rows * cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < cols; ++i) bf.z_beta[flat(r, i)] = static_cast<double>(set.J[r]);

    bf.y_open_idx.assign(F, -1);
    bf.z_idx.assign(F, std::vector<int>(rows * cols, -1));
    for (std::size_t f = 0; f < F; ++f) {
        bf.y_open_idx[f] = bf.model.add_binary("open_" + std::to_string(f));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t i = 0; i < cols; ++i)
                bf.z_idx[f][flat(r, i)] = bf.model.add_continuous(idx3("z", f, r, i), 0.0, 1.0);
    }

    // triangles as vertex triples per cell; quads keep one indicator per cell
    struct Patch {
        std::vector<std::size_t> verts;
    };
    std::vector<Patch> patches;
    for (std::size_t r = 0; r + 1 < rows; ++r) {
        for (std::size_t i = 0; i + 1 < cols; ++i) {
            const std::size_t A = flat(r, i), B = flat(r, i + 1), C = flat(r + 1, i + 1),
                              D = flat(r + 1, i);
            switch (orientation) {
                case pwl::Orientation::TrianglePlus:  // diagonal A-C
                    patches.push_back({{A, B, C}});
                    patches.push_back({{A, C, D}});
                    break;
                case pwl::Orientation::TriangleMinus:  // diagonal B-D
                    patches.push_back({{A, B, D}});
                    patches.push_back({{B, C, D}});
                    break;
                case pwl::Orientation::Quadrilateral:
                    patches.push_back({{A, B, C, D}});
                    break;
            }
        }
    }

    for (std::size_t f = 0; f < F; ++f) {
        std::vector<int> h_idx;
        for (std::size_t t = 0; t < patches.size(); ++t)
            h_idx.push_back(bf.model.add_binary(idx2("h", f, t)));

        // capacity: sum_c x_cf <= mu_f * sum alpha * z
        std::vector<LinTerm> cap;
        for (std::size_t c = 0; c < inst.n_clients(); ++c) cap.push_back({bf.x_idx[c][f], 1.0});
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t i = 0; i < cols; ++i)
                cap.push_back({bf.z_idx[f][flat(r, i)], -inst.mu[f] * set.curves[r].points[i].alpha});
        bf.model.add_constraint("capacity_" + std::to_string(f), std::move(cap), Sense::LE, 0.0);

        // count: sum beta * z <= k_f
        std::vector<LinTerm> count;
        for (std::size_t v = 0; v < rows * cols; ++v)
            count.push_back({bf.z_idx[f][v], bf.z_beta[v]});
        bf.model.add_constraint("count_" + std::to_string(f), std::move(count), Sense::LE,
                                static_cast<double>(inst.k[f]));

        // open: sum z = y_f ; o-sync: sum h = y_f (binary h with sum <= 1 is
        // exactly the single-patch SOS1)
        std::vector<LinTerm> open;
        for (std::size_t v = 0; v < rows * cols; ++v) open.push_back({bf.z_idx[f][v], 1.0});
        open.push_back({bf.y_open_idx[f], -1.0});
        bf.model.add_constraint("open_" + std::to_string(f), std::move(open), Sense::EQ, 0.0);
        std::vector<LinTerm> osync;
        for (int h : h_idx) osync.push_back({h, 1.0});
        osync.push_back({bf.y_open_idx[f], -1.0});
        bf.model.add_constraint("osync_" + std::to_string(f), std::move(osync), Sense::EQ, 0.0);

        // each vertex weight needs one of its incident patches active
        std::vector<std::vector<int>> incident(rows * cols);
        for (std::size_t t = 0; t < patches.size(); ++t)
            for (std::size_t v : patches[t].verts) incident[v].push_back(h_idx[t]);
        for (std::size_t v = 0; v < rows * cols; ++v) {
            std::vector<LinTerm> zs{{bf.z_idx[f][v], 1.0}};
            for (int h : incident[v]) zs.push_back({h, -1.0});
            bf.model.add_constraint("vsync_" + std::to_string(f) + "_" + std::to_string(v),
                                    std::move(zs), Sense::LE, 0.0);
        }
    }

    // limit: total allocated servers across facilities equals the budget
    std::vector<LinTerm> limit;
    for (std::size_t f = 0; f < F; ++f)
        for (std::size_t v = 0; v < rows * cols; ++v)
            limit.push_back({bf.z_idx[f][v], bf.z_beta[v]});
    bf.model.add_constraint("limit", std::move(limit), Sense::EQ, static_cast<double>(inst.p));

    // time-in-system objective term
    for (std::size_t f = 0; f < F; ++f)
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t i = 0; i < cols; ++i)
                if (set.curves[r].points[i].theta != 0.0)
                    bf.model.objective.push_back(
                        {bf.z_idx[f][flat(r, i)], 1000.0 * set.curves[r].points[i].theta / total});

    bf.model.check();
    return bf;
}

}  // namespace

BuiltFormulation build_triangle_surface(const model::Instance& inst, const pwl::BasepointSet& set,
                                        pwl::Orientation orientation) {
    if (orientation == pwl::Orientation::Quadrilateral)
        throw std::invalid_argument("triangle surface: orientation must be plus or minus");
    return build_surface(inst, set, orientation);
}

BuiltFormulation build_quad_surface(const model::Instance& inst, const pwl::BasepointSet& set) {
    return build_surface(inst, set, pwl::Orientation::Quadrilateral);
}

milp::MilpModel emulate_sos(const milp::MilpModel& model) {
    MilpModel out = model;
    out.sos.clear();
    int serial = 0;
    for (const auto& g : model.sos) {
        const std::string tag = "sos" + std::to_string(serial++);
        if (g.type == 1) {
            bool all_binary = true;
            for (int v : g.vars) all_binary &= out.vars[v].integral && out.vars[v].ub <= 1.0;
            if (all_binary) {
                std::vector<LinTerm> sum;
                for (int v : g.vars) sum.push_back({v, 1.0});
                out.add_constraint(tag + "_atmost1", std::move(sum), Sense::LE, 1.0);
            } else {
                std::vector<int> sel;
                for (std::size_t i = 0; i < g.vars.size(); ++i) {
                    const int s = out.add_binary(tag + "_s" + std::to_string(i));
                    sel.push_back(s);
                    out.add_constraint(tag + "_link" + std::to_string(i),
                                       {{g.vars[i], 1.0}, {s, -out.vars[g.vars[i]].ub}}, Sense::LE,
                                       0.0);
                }
                std::vector<LinTerm> sum;
                for (int s : sel) sum.push_back({s, 1.0});
                out.add_constraint(tag + "_atmost1", std::move(sum), Sense::LE, 1.0);
            }
        } else {
            // one binary per segment; each weight bounded by its incident segments
            const std::size_t n = g.vars.size();
            if (n < 2) continue;
            std::vector<int> seg;
            for (std::size_t i = 0; i + 1 < n; ++i)
                seg.push_back(out.add_binary(tag + "_b" + std::to_string(i)));
            std::vector<LinTerm> sum;
            for (int b : seg) sum.push_back({b, 1.0});
            out.add_constraint(tag + "_atmost1", std::move(sum), Sense::LE, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<LinTerm> bound{{g.vars[i], 1.0}};
                if (i > 0) bound.push_back({seg[i - 1], -out.vars[g.vars[i]].ub});
                if (i + 1 < n) bound.push_back({seg[i], -out.vars[g.vars[i]].ub});
                out.add_constraint(tag + "_w" + std::to_string(i), std::move(bound), Sense::LE, 0.0);
            }
        }
    }
    out.check();
    return out;
}

void drop_convex_sos2(BuiltFormulation& built) {
    if (built.kind != Kind::ThinnedCurves) return;
    auto& sos = built.model.sos;
    sos.erase(std::remove_if(sos.begin(), sos.end(), [](const milp::SosGroup& g) { return g.type == 2; }),
              sos.end());
}

FormulationResult solve_formulation(const BuiltFormulation& built, const model::Instance& inst,
                                    milp::SolverAdapter& solver, const milp::SolveOptions& opts) {
    const MilpModel* m = &built.model;
    MilpModel lowered;
    const bool need_lowering =
        (!built.model.sos.empty()) && (!solver.supports_sos1() || !solver.supports_sos2());
    if (need_lowering) {
        lowered = emulate_sos(built.model);
        m = &lowered;
    }
    auto r = solver.solve(*m, opts);
    FormulationResult res;
    res.status = r.status;
    res.gap = r.gap;
    if (r.status == milp::SolveStatus::Infeasible) return res;
    res.objective_ms = r.objective;
    const std::size_t C = inst.n_clients(), F = inst.n_facilities();
    res.x.assign(C, std::vector<double>(F, 0.0));
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t f = 0; f < F; ++f)
            res.x[c][f] = std::max(0.0, r.values[built.x_idx[c][f]]);
    res.y_raw.assign(F, 0.0);
    if (built.kind == Kind::ThinnedCurves) {
        for (std::size_t f = 0; f < F; ++f)
            for (std::size_t jp = 0; jp < built.J.size(); ++jp)
                res.y_raw[f] += built.J[jp] * r.values[built.ydot_idx[f][jp]];
    } else {
        for (std::size_t f = 0; f < F; ++f)
            for (std::size_t v = 0; v < built.z_beta.size(); ++v)
                res.y_raw[f] += built.z_beta[v] * r.values[built.z_idx[f][v]];
    }
    return res;
}

ExtractedSolution extract_solution(const BuiltFormulation& built, const FormulationResult& result) {
    if (result.status == milp::SolveStatus::Infeasible)
        throw std::logic_error("extract_solution: no solution to extract");
    (void)built;
    return {result.x, result.y_raw};
}

model::Solution to_integer_solution(const ExtractedSolution& extracted) {
    model::Solution sol;
    sol.x = extracted.x;
    for (double y : extracted.y) {
        const double r = std::round(y);
        if (std::abs(y - r) > 1e-6)
            throw std::runtime_error("allocation " + std::to_string(y) +
                                     " is not integer (solver tolerance problem)");
        sol.y.push_back(static_cast<int>(r));
    }
    return sol;
}

}  // namespace qflp::formulations
