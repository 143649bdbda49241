#include "qflp/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qflp::queueing {

namespace {

void require_steady_state(double a, int k) {
    if (!(a > 0.0)) throw std::domain_error("offered load must be positive, got a=" + std::to_string(a));
    if (k < 1) throw std::domain_error("server count must be >= 1, got k=" + std::to_string(k));
    if (!(a < static_cast<double>(k)))
        throw std::domain_error("not in steady state: a=" + std::to_string(a) + " >= k=" + std::to_string(k));
}

}  // namespace

double v_recursive(double a, int k) {
    if (!(a > 0.0)) throw std::domain_error("v_recursive: a must be > 0");
    if (k < 1) throw std::domain_error("v_recursive: k must be >= 1");
    double v = 1.0 / a;
    for (int i = 2; i <= k; ++i) v = (static_cast<double>(i) / a) * (v + 1.0);
    return v;
}

std::vector<double> v_batch(std::span<const double> a, std::span<const int> k) {
    if (a.size() != k.size()) throw std::invalid_argument("v_batch: length mismatch");
    std::vector<double> r(a.size());
    int k_max = 0;
    for (std::size_t idx = 0; idx < a.size(); ++idx) {
        if (!(a[idx] > 0.0)) throw std::domain_error("v_batch: a must be > 0");
        if (k[idx] < 1) throw std::domain_error("v_batch: k must be >= 1");
        r[idx] = 1.0 / a[idx];
        k_max = std::max(k_max, k[idx]);
    }
    for (int i = 2; i <= k_max; ++i) {
        for (std::size_t idx = 0; idx < a.size(); ++idx) {
            if (k[idx] >= i) r[idx] = (static_cast<double>(i) / a[idx]) * (r[idx] + 1.0);
        }
    }
    return r;
}

double erlang_c(double a, int k) {
    require_steady_state(a, k);
    const double kd = static_cast<double>(k);
    return kd / (kd + (kd - a) * v_recursive(a, k));
}

double erlang_c_direct(double a, int k) {
    require_steady_state(a, k);
    const double kd = static_cast<double>(k);
    // numerator k a^k / (k! (k-a)); denominator adds sum_{i<k} a^i/i!
    double a_pow = std::pow(a, kd);
    double k_fact = std::tgamma(kd + 1.0);
    if (!std::isfinite(a_pow) || !std::isfinite(k_fact))
        throw std::overflow_error("erlang_c_direct: a^k or k! overflows for k=" + std::to_string(k));
    double head = kd * a_pow / (k_fact * (kd - a));
    double tail = 0.0;
    double term = 1.0;  // a^0 / 0!
    for (int i = 0; i < k; ++i) {
        tail += term;
        term *= a / static_cast<double>(i + 1);
    }
    if (!std::isfinite(head) || !std::isfinite(tail))
        throw std::overflow_error("erlang_c_direct: intermediate overflow for k=" + std::to_string(k));
    return head / (head + tail);
}

double n_system(double a, int k) {
    require_steady_state(a, k);
    const double kd = static_cast<double>(k);
    return a + a / (kd - a) * erlang_c(a, k);
}

double t_system(double lambda, double mu, int k) {
    if (!(mu > 0.0)) throw std::domain_error("t_system: mu must be > 0");
    if (!(lambda > 0.0)) throw std::domain_error("t_system: lambda must be > 0");
    const double a = lambda / mu;
    require_steady_state(a, k);
    return erlang_c(a, k) / (static_cast<double>(k) * mu - lambda) + 1.0 / mu;
}

double n_queue(double a, int k) { return n_system(a, k) - a; }

double t_queue(double lambda, double mu, int k) { return t_system(lambda, mu, k) - 1.0 / mu; }

double dn_da(double a, int k) {
    require_steady_state(a, k);
    const double kd = static_cast<double>(k);
    if (k == 1) {
        const double d = 1.0 - a;
        return 1.0 / (d * d);
    }
    const double v = v_recursive(a, k);
    const double v1 = v_recursive(a, k - 1);
    const double d = kd - a;
    const double denom = d * v + kd;
    return kd * (kd + 1.0) / (d * d * v + kd * d) + 1.0
         + a * kd / (d * d * d * v + d * d * kd)
         - (v1 * kd * kd * d - v * a * kd + kd * kd * kd) / (d * denom * denom);
}

QueueMetrics metrics(const QueueParams& p) {
    const double a = p.offered_load();
    QueueMetrics m;
    m.ec = erlang_c(a, p.k);
    m.n_system = n_system(a, p.k);
    m.t_system = t_system(p.lambda, p.mu, p.k);
    m.n_queue = m.n_system - a;
    m.t_queue = m.t_system - 1.0 / p.mu;
    return m;
}

double nonconvexity_witness(double a, int k, double v1, double v2) {
    require_steady_state(a, k);
    // A: mixed-integer second difference in k (exact via the V form).
    const double A = erlang_c(a, k + 2) - 2.0 * erlang_c(a, k + 1) + erlang_c(a, k);
    const double h = 1e-6 * std::max(1.0, a);
    auto dec_da = [&](int kk) {
        return (erlang_c(a + h, kk) - erlang_c(a - h, kk)) / (2.0 * h);
    };
    const double B = dec_da(k + 1) - dec_da(k);
    const double D = (erlang_c(a + h, k) - 2.0 * erlang_c(a, k) + erlang_c(a - h, k)) / (h * h);
    return v1 * v1 * A + 2.0 * v1 * v2 * B + v2 * v2 * D;
}

}  // namespace qflp::queueing
