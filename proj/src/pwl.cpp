#include "qflp/pwl.hpp"

#include "qflp/queueing.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

namespace qflp::pwl {

namespace {

using qflp::queueing::dn_da;
using qflp::queueing::n_system;

constexpr double kLoadCap = 0.98;

// Derivative of N_j with the same a->0 extension as n_at. The a->0 limit of
// dN/da is 1 for j >= 2 (no queueing at vanishing load) and 1 for j = 1.
double slope_at(double a, int j) {
    const double floor_a = 1e-12 * std::max(1, j);
    return dn_da(std::max(a, floor_a), j);
}

// Max of chord - N over [lo, hi] for convex N: the maximizer solves
// dN/da = chord slope, located by bisection on the increasing derivative.
double segment_error(double lo, double hi, int j) {
    if (hi - lo <= 0.0) return 0.0;
    const double n_lo = n_at(lo, j);
    const double n_hi = n_at(hi, j);
    const double slope = (n_hi - n_lo) / (hi - lo);
    double a = lo, b = hi;
    for (int it = 0; it < 60 && b - a > 1e-14 * (hi - lo); ++it) {
        const double mid = 0.5 * (a + b);
        (slope_at(mid, j) < slope ? a : b) = mid;
    }
    const double at = 0.5 * (a + b);
    const double chord = n_lo + slope * (at - lo);
    return std::max(0.0, chord - n_at(at, j));
}

}  // namespace

double n_at(double a, int j) {
    if (a <= 0.0) return 0.0;
    return n_system(a, j);
}

const CurvePWL& BasepointSet::curve_for(int j) const {
    for (const auto& c : curves)
        if (c.j == j) return c;
    throw std::out_of_range("no curve for j=" + std::to_string(j));
}

CurvePWL generate_basepoints(int j, int m) {
    if (j < 1) throw std::domain_error("generate_basepoints: j must be >= 1");
    if (m < 4) throw std::domain_error("generate_basepoints: m must be >= 4");
    const double hi = kLoadCap * j;

    std::vector<double> x(m);
    for (int i = 0; i < m; ++i) x[i] = hi * i / (m - 1);

    auto seg_err = [&](int i) { return segment_error(x[i], x[i + 1], j); };

    std::vector<double> best = x;
    double best_max = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < 200; ++sweep) {
        // Gauss-Seidel: move each interior abscissa to equalize the max
        // errors of its two adjacent segments (left error grows with x[i],
        // right error shrinks).
        for (int i = 1; i < m - 1; ++i) {
            double lo = x[i - 1], up = x[i + 1];
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + up);
                const double el = segment_error(x[i - 1], mid, j);
                const double er = segment_error(mid, x[i + 1], j);
                (el < er ? lo : up) = mid;
            }
            x[i] = 0.5 * (lo + up);
        }
        double e_min = std::numeric_limits<double>::infinity(), e_max = 0.0;
        for (int i = 0; i < m - 1; ++i) {
            const double e = seg_err(i);
            e_min = std::min(e_min, e);
            e_max = std::max(e_max, e);
        }
        if (e_max < best_max) {
            best_max = e_max;
            best = x;
        }
        if (e_max <= e_min * 1.01) break;
    }

    CurvePWL curve;
    curve.j = j;
    curve.points.reserve(m);
    for (double a : best) curve.points.push_back({a, n_at(a, j)});
    return curve;
}

double eval_curve(const CurvePWL& curve, double a) {
    const auto& p = curve.points;
    if (p.size() < 2) throw std::domain_error("eval_curve: curve needs >= 2 points");
    const double eps = 1e-9 * std::max(1.0, p.back().alpha);
    if (a < p.front().alpha - eps || a > p.back().alpha + eps)
        throw std::domain_error("eval_curve: a=" + std::to_string(a) + " outside [" +
                                std::to_string(p.front().alpha) + ", " + std::to_string(p.back().alpha) + "]");
    a = std::clamp(a, p.front().alpha, p.back().alpha);
    auto it = std::upper_bound(p.begin(), p.end(), a,
                               [](double v, const Basepoint& b) { return v < b.alpha; });
    std::size_t i = std::min(p.size() - 2, static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - p.begin() - 1)));
    const auto& l = p[i];
    const auto& r = p[i + 1];
    const double t = (a - l.alpha) / (r.alpha - l.alpha);
    return l.theta + t * (r.theta - l.theta);
}

double curve_error(const CurvePWL& curve, int samples_per_segment) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
        const double lo = curve.points[i].alpha, hi = curve.points[i + 1].alpha;
        for (int s = 1; s < samples_per_segment; ++s) {
            const double a = lo + (hi - lo) * s / samples_per_segment;
            worst = std::max(worst, std::abs(eval_curve(curve, a) - n_at(a, curve.j)));
        }
    }
    return worst;
}

BasepointSet make_standard_set(const std::string& shorthand, int k_max, int m) {
    if (k_max < 1) throw std::domain_error("make_standard_set: k_max must be >= 1");
    std::vector<int> J;
    if (shorthand == "k100") {
        for (int j = 1; j <= k_max; ++j) J.push_back(j);
    } else {
        int base = 0;
        if (shorthand == "2^i") base = 2;
        else if (shorthand == "3^i") base = 3;
        else if (shorthand == "4^i") base = 4;
        else throw std::invalid_argument("unknown basepoint set: " + shorthand);
        for (long long p = 1; p < k_max; p *= base) J.push_back(static_cast<int>(p));
        J.push_back(k_max);
    }
    J.erase(std::unique(J.begin(), J.end()), J.end());

    BasepointSet set;
    set.name = shorthand;
    set.m = m;
    set.J = J;
    set.curves.reserve(J.size());
    for (int j : J) set.curves.push_back(generate_basepoints(j, m));
    return set;
}

std::vector<BasepointSet> standard_sets(int k_max) {
    return {make_standard_set("2^i", k_max, 15), make_standard_set("3^i", k_max, 8),
            make_standard_set("4^i", k_max, 6), make_standard_set("k100", k_max, 8)};
}

namespace {

struct Vertex {
    double alpha;
    double beta;
    double theta;
};

// Corner order: A = (row r, col i), B = (r, i+1), C = (r+1, i+1), D = (r+1, i).
struct Cell {
    Vertex a, b, c, d;
};

Vertex vertex_of(const BasepointSet& s, std::size_t row, std::size_t col) {
    const auto& p = s.curves[row].points[col];
    return {p.alpha, static_cast<double>(s.J[row]), p.theta};
}

// Barycentric interpolation; returns nullopt-like NaN when (a, y) is outside.
double triangle_value(const Vertex& p, const Vertex& q, const Vertex& r, double a, double y) {
    const double det = (q.alpha - p.alpha) * (r.beta - p.beta) - (r.alpha - p.alpha) * (q.beta - p.beta);
    if (std::abs(det) < 1e-15) return std::numeric_limits<double>::quiet_NaN();
    const double wq = ((a - p.alpha) * (r.beta - p.beta) - (r.alpha - p.alpha) * (y - p.beta)) / det;
    const double wr = ((q.alpha - p.alpha) * (y - p.beta) - (a - p.alpha) * (q.beta - p.beta)) / det;
    const double wp = 1.0 - wq - wr;
    const double tol = -1e-9;
    if (wp < tol || wq < tol || wr < tol) return std::numeric_limits<double>::quiet_NaN();
    return wp * p.theta + wq * q.theta + wr * r.theta;
}

double cell_value(const Cell& c, Orientation o, double a, double y) {
    auto pick = [&](double u, double v) { return std::isnan(u) ? v : (std::isnan(v) ? u : std::min(u, v)); };
    switch (o) {
        case Orientation::TrianglePlus: {
            // diagonal A-C
            const double u = triangle_value(c.a, c.b, c.c, a, y);
            return std::isnan(u) ? triangle_value(c.a, c.c, c.d, a, y) : u;
        }
        case Orientation::TriangleMinus: {
            // diagonal B-D
            const double u = triangle_value(c.a, c.b, c.d, a, y);
            return std::isnan(u) ? triangle_value(c.b, c.c, c.d, a, y) : u;
        }
        case Orientation::Quadrilateral: {
            // lower intersection with the convex hull of the four corners:
            // min over containing corner triangles.
            double v = triangle_value(c.a, c.b, c.c, a, y);
            v = pick(v, triangle_value(c.a, c.c, c.d, a, y));
            v = pick(v, triangle_value(c.a, c.b, c.d, a, y));
            v = pick(v, triangle_value(c.b, c.c, c.d, a, y));
            return v;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double eval_surface(const SurfaceMesh& mesh, double a, double y) {
    const auto& s = mesh.base;
    if (s.J.size() < 2) throw std::domain_error("eval_surface: need >= 2 curves");
    if (y < s.J.front() - 1e-9 || y > s.J.back() + 1e-9)
        throw std::domain_error("eval_surface: y=" + std::to_string(y) + " outside mesh");
    std::size_t r = 0;
    while (r + 2 < s.J.size() && y >= s.J[r + 1]) ++r;
    const double span = s.J[r + 1] - s.J[r];
    const double t = std::clamp((y - s.J[r]) / span, 0.0, 1.0);
    const int m = s.m;
    // cell left/right edges at height y (trapezoid sides are straight lines
    // between corresponding basepoints of the two bounding curves)
    auto edge = [&](int col) {
        return (1.0 - t) * s.curves[r].points[col].alpha + t * s.curves[r + 1].points[col].alpha;
    };
    const double eps = 1e-9 * std::max(1.0, edge(m - 1));
    if (a < edge(0) - eps || a > edge(m - 1) + eps)
        throw std::domain_error("eval_surface: a=" + std::to_string(a) + " outside row at y=" + std::to_string(y));
    int col = 0;
    while (col + 2 < m && a > edge(col + 1)) ++col;
    Cell cell{vertex_of(s, r, col), vertex_of(s, r, col + 1), vertex_of(s, r + 1, col + 1), vertex_of(s, r + 1, col)};
    const double v = cell_value(cell, mesh.orientation, std::clamp(a, edge(0), edge(m - 1)),
                                std::clamp(y, static_cast<double>(s.J[r]), static_cast<double>(s.J[r + 1])));
    if (std::isnan(v)) throw std::domain_error("eval_surface: point escaped its cell (degenerate mesh)");
    return v;
}

double surface_error(const SurfaceMesh& mesh, int grid_density) {
    const auto& s = mesh.base;
    double worst = 0.0;
    for (int j = s.J.front(); j <= s.J.back(); ++j) {
        const double row_hi = kLoadCap * j;
        for (int g = 0; g <= grid_density * (s.m - 1); ++g) {
            double a = row_hi * g / (grid_density * (s.m - 1));
            a = std::min(a, row_hi - 1e-9 * std::max(1.0, row_hi));
            if (a < 0.0) a = 0.0;
            worst = std::max(worst, std::abs(eval_surface(mesh, a, j) - n_at(a, j)));
        }
    }
    return worst;
}

std::string to_json(const BasepointSet& set) {
    nlohmann::json out;
    out["name"] = set.name;
    out["m"] = set.m;
    out["J"] = set.J;
    out["curves"] = nlohmann::json::array();
    for (const auto& c : set.curves) {
        nlohmann::json jc;
        jc["j"] = c.j;
        jc["points"] = nlohmann::json::array();
        for (const auto& p : c.points) jc["points"].push_back({{"alpha", p.alpha}, {"theta", p.theta}});
        out["curves"].push_back(std::move(jc));
    }
    return out.dump(2);
}

BasepointSet basepoint_set_from_json(const std::string& text) {
    const auto in = nlohmann::json::parse(text);
    BasepointSet set;
    set.name = in.value("name", "");
    set.m = in.at("m").get<int>();
    set.J = in.at("J").get<std::vector<int>>();
    for (const auto& jc : in.at("curves")) {
        CurvePWL c;
        c.j = jc.at("j").get<int>();
        for (const auto& jp : jc.at("points"))
            c.points.push_back({jp.at("alpha").get<double>(), jp.at("theta").get<double>()});
        set.curves.push_back(std::move(c));
    }
    return set;
}

void save_basepoint_set(const BasepointSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(set) << '\n';
}

BasepointSet load_basepoint_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return basepoint_set_from_json(text);
}

}  // namespace qflp::pwl
