#pragma once

#include "qflp/milp.hpp"
#include "qflp/model.hpp"
#include "qflp/pwl.hpp"

#include <vector>

// MILP builders for the four linear formulations: thinned separate curves,
// the two triangle-mesh surfaces, and the quadrilateral-mesh surface.
namespace qflp::formulations {

enum class Kind { ThinnedCurves, TrianglePlus, TriangleMinus, Quadrilateral };

// A built model plus the variable handles needed to read a solution back.
struct BuiltFormulation {
    Kind kind = Kind::ThinnedCurves;
    milp::MilpModel model;

    std::vector<std::vector<int>> x_idx;  // [client][facility]

    // curves: selector binaries per (facility, j in J)
    std::vector<int> J;
    std::vector<std::vector<int>> ydot_idx;  // [facility][position in J]

    // surfaces: open binary per facility and flattened vertex weights with
    // their server coordinate
    std::vector<int> y_open_idx;              // [facility]
    std::vector<std::vector<int>> z_idx;      // [facility][flat vertex]
    std::vector<double> z_beta;               // [flat vertex] server coordinate
};

struct FormulationResult {
    milp::SolveStatus status = milp::SolveStatus::Infeasible;
    std::vector<std::vector<double>> x;  // [client][facility]
    std::vector<double> y_raw;           // integer for curves, possibly fractional for surfaces
    double objective_ms = 0.0;
    double gap = 0.0;
};

// Separate per-server-count curves restricted to J (J must contain 1 and be
// a subset of the set's curves). Variables: x_cf >= 0, one selector binary
// per (f, j), curve weights in [0,1] tied to the selector; SOS2 over each
// curve's weights, SOS1 over each facility's selectors; count sum j*sel <=
// k_f; budget as an upper bound (equality is restored by the greedy pass).
BuiltFormulation build_thinned_curves(const model::Instance& inst, const pwl::BasepointSet& set,
                                      const std::vector<int>& J);

// Joint surface over all curves of the set, one triangle indicator per mesh
// triangle; plus/minus selects the diagonal direction.
BuiltFormulation build_triangle_surface(const model::Instance& inst, const pwl::BasepointSet& set,
                                        pwl::Orientation orientation);

// As the triangle surface but one indicator per quadrilateral cell; the
// minimizing objective selects the lower convex-hull value.
BuiltFormulation build_quad_surface(const model::Instance& inst, const pwl::BasepointSet& set);

// Lowers every SOS group to an equivalent binary formulation: SOS1 over
// binaries becomes sum <= 1, over continuous variables selector binaries;
// SOS2 becomes segment binaries with adjacency coupling. The feasible set
// is unchanged.
milp::MilpModel emulate_sos(const milp::MilpModel& model);

// Removes the SOS2 groups from a curve model. Valid because each curve is
// convex: a non-adjacent weight combination reproduces the same load at a
// strictly larger objective value, so optima never use one.
void drop_convex_sos2(BuiltFormulation& built);

// Solve via the adapter, lowering SOS groups first when unsupported.
FormulationResult solve_formulation(const BuiltFormulation& built, const model::Instance& inst,
                                    milp::SolverAdapter& solver, const milp::SolveOptions& opts);

// Assignment plus allocation as the formulation produced it; surface
// allocations may be fractional (interpolation between mesh rows).
struct ExtractedSolution {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
};

ExtractedSolution extract_solution(const BuiltFormulation& built, const FormulationResult& result);

// Curve formulations promise integer allocations: asserts each y within
// 1e-6 of an integer (throws std::runtime_error otherwise — a solver
// tolerance problem) and rounds.
model::Solution to_integer_solution(const ExtractedSolution& extracted);

}  // namespace qflp::formulations
