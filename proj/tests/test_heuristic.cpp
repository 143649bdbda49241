#include "doctest.h"
#include "fixtures.hpp"
#include "qflp/heuristic.hpp"
#include "qflp/model.hpp"

#include <algorithm>
#include <numeric>

using namespace qflp;
using namespace qflp::heuristic;

TEST_SUITE("heuristic") {

TEST_CASE("greedy_assign: ample single facility takes everything") {
    model::Instance inst;
    inst.clients = {"c1", "c2"};
    inst.facilities = {"f"};
    inst.latency_ms = {{5.0}, {6.0}};
    inst.lambda = {10.0, 20.0};
    inst.mu = {100.0};
    inst.k = {4};
    inst.p = 4;
    auto x = greedy_assign(inst, {0});
    REQUIRE(x.has_value());
    CHECK((*x)[0][0] == doctest::Approx(10.0));
    CHECK((*x)[1][0] == doctest::Approx(20.0));
}

TEST_CASE("greedy_assign: nearest-first is deliberately suboptimal") {
    // latencies (1,2 / 2,4), unit demand, unit capacity: the greedy pairs
    // c1->f1 and then c2 can only reach f2, total RTT 5 (optimum is 4)
    model::Instance inst;
    inst.clients = {"c1", "c2"};
    inst.facilities = {"f1", "f2"};
    inst.latency_ms = {{1.0, 2.0}, {2.0, 4.0}};
    inst.lambda = {1.0, 1.0};
    inst.mu = {1.0 / model::kCapacityCap, 1.0 / model::kCapacityCap};
    inst.k = {1, 1};
    inst.p = 2;
    auto x = greedy_assign(inst, {0, 1});
    REQUIRE(x.has_value());
    CHECK((*x)[0][0] == doctest::Approx(1.0));
    CHECK((*x)[1][1] == doctest::Approx(1.0));
    double rtt = 0.0;
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t f = 0; f < 2; ++f) rtt += (*x)[c][f] * inst.latency_ms[c][f];
    CHECK(rtt == doctest::Approx(5.0));
}

TEST_CASE("greedy_assign: exhausted facility spills to the next") {
    model::Instance inst;
    inst.clients = {"c"};
    inst.facilities = {"near", "far"};
    inst.latency_ms = {{1.0, 9.0}};
    inst.lambda = {30.0};
    inst.mu = {10.0, 10.0};
    inst.k = {2, 2};
    inst.p = 4;
    auto x = greedy_assign(inst, {0, 1});
    REQUIRE(x.has_value());
    CHECK((*x)[0][0] == doctest::Approx(0.98 * 20.0));
    CHECK((*x)[0][1] == doctest::Approx(30.0 - 0.98 * 20.0));

    // insufficient subset capacity
    CHECK_FALSE(greedy_assign(inst, {0}).has_value());
}

TEST_CASE("solve_subset on the two-client example") {
    auto inst = fixtures::two_client_example(20.0, 10.0);
    auto sol = solve_subset(inst, {0, 1, 2}, 5);
    REQUIRE(sol.has_value());
    CHECK(sol->t >= 56.7 * 0.999);  // never beats the optimum
    CHECK(std::accumulate(sol->y.begin(), sol->y.end(), 0) == 5);

    auto one = solve_subset(inst, {1}, 5);
    REQUIRE(one.has_value());
    CHECK(one->y == std::vector<int>{0, 5, 0});

    CHECK_FALSE(solve_subset(inst, {}, 5).has_value());
}

TEST_CASE("neigh expansion") {
    CHECK(neigh({0}, {0}, {0}).empty());

    auto n = neigh({0}, {0, 1}, {});
    // add 1, remove 0, swap -> {0,1}, {}, {1}
    REQUIRE(n.size() == 3);
    CHECK(std::count(n.begin(), n.end(), FacilitySet{0, 1}) == 1);
    CHECK(std::count(n.begin(), n.end(), FacilitySet{}) == 1);
    CHECK(std::count(n.begin(), n.end(), FacilitySet{1}) == 1);

    auto big = neigh({1, 2}, {0, 1, 2, 3}, {1});
    const std::size_t adds = 2, removes = 1;
    CHECK(big.size() <= adds + removes + adds * removes);
}

TEST_CASE("descent improves monotonically and finds the dominant facility") {
    // facility 1 dominates: fastest and closest to both clients
    model::Instance inst;
    inst.clients = {"a", "b"};
    inst.facilities = {"slow1", "best", "slow2"};
    inst.latency_ms = {{50.0, 5.0, 60.0}, {55.0, 5.0, 50.0}};
    inst.lambda = {4.0, 4.0};
    inst.mu = {5.0, 20.0, 5.0};
    inst.k = {6, 6, 6};
    inst.p = 6;
    FacilitySet all{0, 1, 2};
    auto reference = solve_subset(inst, {1}, 6);
    REQUIRE(reference.has_value());
    for (const FacilitySet& seed : {FacilitySet{0}, FacilitySet{2}, FacilitySet{0, 2}}) {
        auto seed_sol = solve_subset(inst, seed, 6);
        auto best = descent(inst, seed, 6, all, {});
        REQUIRE(best.has_value());
        // all servers end up on the dominant facility (ties may keep an
        // idle facility in the subset)
        CHECK(best->y == std::vector<int>{0, 6, 0});
        CHECK(best->t == doctest::Approx(reference->t).epsilon(1e-9));
        if (seed_sol) CHECK(best->t <= seed_sol->t);
    }
    // already-optimal seed is a fixed point
    auto fixed = descent(inst, {1}, 6, all, {});
    REQUIRE(fixed.has_value());
    CHECK(fixed->t == doctest::Approx(reference->t).epsilon(1e-9));
}

TEST_CASE("genetic: deterministic, valid, and near-optimal on the reference instance") {
    auto inst = fixtures::two_client_example(20.0, 10.0);
    GeneticConfig cfg;
    cfg.seed = 42;
    auto a = genetic(inst, 5, cfg);
    auto b = genetic(inst, 5, cfg);
    CHECK(a.y == b.y);
    CHECK(a.objective_ms == doctest::Approx(b.objective_ms).epsilon(1e-12));

    double best = 1e300;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        GeneticConfig c2;
        c2.seed = seed;
        auto sol = genetic(inst, 5, c2);
        CHECK(model::validate(inst, sol).ok);
        CHECK(std::accumulate(sol.y.begin(), sol.y.end(), 0) == 5);
        best = std::min(best, sol.objective_ms);
    }
    CHECK(best <= 56.7 * 1.10);
    CHECK(best >= 56.7 * 0.999);
}

TEST_CASE("genetic: degenerate config equals a single descent") {
    auto inst = fixtures::two_client_example(20.0, 10.0);
    GeneticConfig cfg;
    cfg.population_size = 1;
    cfg.merge_steps = 0;
    cfg.seed = 7;
    auto sol = genetic(inst, 5, cfg);
    CHECK(model::validate(inst, sol).ok);
}

}  // TEST_SUITE
