#pragma once

#include <string>
#include <vector>

// Piecewise-linear approximations of N_j(a), the expected number of requests
// in an M/M/j system as a function of offered load: optimized basepoints per
// curve, curve families keyed by server count, and triangle/quadrilateral
// surface meshes joining the curves.
namespace qflp::pwl {

struct Basepoint {
    double alpha;  // offered load
    double theta;  // N_j(alpha)
};

// One curve N_j on [0, 0.98*j], m >= 4 basepoints, alpha strictly increasing.
struct CurvePWL {
    int j = 1;
    std::vector<Basepoint> points;
};

struct BasepointSet {
    std::string name;        // J shorthand, e.g. "2^i" or "k100"
    int m = 0;               // basepoints per curve
    std::vector<int> J;      // strictly increasing server counts, 1 and k_max included
    std::vector<CurvePWL> curves;

    const CurvePWL& curve_for(int j) const;
    int k_max() const { return J.back(); }
};

enum class Orientation { TrianglePlus, TriangleMinus, Quadrilateral };

struct SurfaceMesh {
    BasepointSet base;
    Orientation orientation = Orientation::TrianglePlus;
};

// N_j(a) extended with N_j(0) = 0 (the a->0 limit).
double n_at(double a, int j);

// m basepoints on [0, 0.98*j] approximately minimizing the max chord error,
// endpoints fixed, interior abscissae by iterative error equalization.
// Converges when adjacent segment max errors agree within 1% relative or
// after 200 sweeps; always returns the best points found.
CurvePWL generate_basepoints(int j, int m);

// Linear interpolation between the bracketing basepoints; out-of-interval
// arguments throw std::domain_error.
double eval_curve(const CurvePWL& curve, double a);

// Max |eval_curve - N_j| over a dense grid (independent error oracle).
double curve_error(const CurvePWL& curve, int samples_per_segment = 200);

// Build a full set for the given J shorthand ("2^i", "3^i", "4^i", "k100"),
// J capped at k_max with 1 and k_max always present.
BasepointSet make_standard_set(const std::string& shorthand, int k_max, int m);

// The four selected configurations (15,2^i), (8,3^i), (6,4^i), (8,k100).
std::vector<BasepointSet> standard_sets(int k_max);

// Max |mesh interpolant - N| over integer-j rows of the mesh domain,
// grid_density samples per cell edge, restricted to a <= 0.98*j.
double surface_error(const SurfaceMesh& mesh, int grid_density);

// Triangle meshes: barycentric interpolation in the containing triangle.
// Quadrilateral: minimum convex-combination value at (a, y), i.e. the lower
// intersection with the corner convex hull. y may be fractional.
double eval_surface(const SurfaceMesh& mesh, double a, double y);

// JSON round-trip, schema {name, m, J, curves:[{j, points:[{alpha,theta}]}]}.
std::string to_json(const BasepointSet& set);
BasepointSet basepoint_set_from_json(const std::string& text);
void save_basepoint_set(const BasepointSet& set, const std::string& path);
BasepointSet load_basepoint_set(const std::string& path);

}  // namespace qflp::pwl
