#pragma once

#include <cstdint>
#include <span>
#include <vector>

// Numerically stable evaluation of Erlang-C and derived M/M/k performance
// measures. All functions are pure; steady state (0 < a < k) is a hard
// precondition and violations throw std::domain_error.
namespace qflp::queueing {

struct QueueParams {
    double lambda = 0.0;  // arrival rate, requests/s
    double mu = 1.0;      // per-server service rate, requests/s
    int k = 1;            // server count

    double offered_load() const { return lambda / mu; }
    double utilisation() const { return lambda / (mu * static_cast<double>(k)); }
};

struct QueueMetrics {
    double ec;        // probability an arriving request queues
    double n_system;  // expected requests in system
    double t_system;  // expected time in system, seconds
    double n_queue;
    double t_queue;
};

// V(a,k) = sum_{i=0}^{k-1} (k!/i!) a^(i-k), computed by the loop form
// V(a,1) = 1/a, V(a,k) = (k/a)(V(a,k-1) + 1). Finite where the factorial
// form of Erlang-C overflows.
double v_recursive(double a, int k);

// Element-wise v_recursive over equal-length sequences; single pass over
// max(k) iterations with per-element masking. Entries finished early keep
// their final value.
std::vector<double> v_batch(std::span<const double> a, std::span<const int> k);

// EC(a,k) = k / (k + (k-a) V(a,k)); requires 0 < a < k.
double erlang_c(double a, int k);

// Literal factorial-sum evaluation of Erlang-C; test oracle only. Throws
// std::overflow_error once a^k or k! leaves double range (k near 145).
double erlang_c_direct(double a, int k);

// N(a,k) = a + a/(k-a) EC(a,k), expected requests in system.
double n_system(double a, int k);

// T(lambda,mu,k) = EC/(k mu - lambda) + 1/mu, expected time in system (s).
double t_system(double lambda, double mu, int k);

double n_queue(double a, int k);
double t_queue(double lambda, double mu, int k);

// d/da N(a,k) at fixed k, via the closed form in V(a,k) and V(a,k-1).
double dn_da(double a, int k);

// Combined metrics at one operating point.
QueueMetrics metrics(const QueueParams& p);

// Quadratic form v^T H v of the mixed-integer Hessian of EC(a,k):
// A = second difference in k, D = d^2/da^2, B the mixed entry. B and D are
// taken by central differences with step 1e-6*max(1,a); A is exact.
double nonconvexity_witness(double a, int k, double v1, double v2);

}  // namespace qflp::queueing
