#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../tests/oracles.hpp"
#include "spinlab/counting.hpp"
#include "spinlab/exact.hpp"
#include "spinlab/logspace.hpp"
#include "spinlab/model.hpp"

using namespace spinlab;

TEST_CASE("plan cutoff matches the decomposition formula") {
    auto plan = make_counting_plan(16, 0.5, 0.05, 0.05);
    double e2 = std::exp(2.0);
    CHECK(plan.k == static_cast<int>(std::ceil(e2 * 16.0 + std::log(40.0))));
    CHECK_THROWS_AS(make_counting_plan(16, 0.5, 0.6, 0.5), std::invalid_argument);
}

TEST_CASE("z_s_theta_exact on the hardcore edge") {
    auto m = make_hardcore(make_graph(2, {{0, 1}}), 4.0);
    std::vector<int> empty_set;
    CHECK(z_s_theta_exact(m, empty_set, 0.0) == doctest::Approx(std::log(9.0)).epsilon(1e-13));
    std::vector<int> su = {0};
    CHECK(z_s_theta_exact(m, su, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
    std::vector<int> both = {0, 1};
    CHECK(z_s_theta_exact(m, both, 0.5) == kNegInf);
}

TEST_CASE("weitz marginal closed forms") {
    auto iso = make_hardcore(make_graph(1, {}), 4.0);
    Pinning none;
    for (int depth : {0, 1, 5}) CHECK(weitz_marginal(iso, none, 0, depth) == doctest::Approx(0.8).epsilon(1e-13));

    auto edge = make_hardcore(make_graph(2, {{0, 1}}), 4.0);
    CHECK(weitz_marginal(edge, none, 0, 10) == doctest::Approx(4.0 / 9.0).epsilon(1e-13));
    // Depth 0 truncation: the leaf formula lambda/(1+lambda).
    CHECK(weitz_marginal(edge, none, 0, 0) == doctest::Approx(0.8).epsilon(1e-13));
}

TEST_CASE("weitz marginal equals enumeration on graphs with cycles") {
    for (int idx = 0; idx < 12; ++idx) {
        auto g = oracles::random_graph(9, 3, 3000 + static_cast<uint64_t>(idx));
        auto m = make_hardcore(g, 0.7 + 0.31 * idx);
        auto d = exact_distribution(m);
        Pinning none;
        for (int v = 0; v < std::min(3, m.n()); ++v) {
            double enumerated = 0.0;
            for (uint32_t mask = 0; mask < d.log_probs.size(); ++mask)
                if (d.log_probs[mask] != kNegInf && (mask >> v & 1)) enumerated += d.prob(mask);
            CHECK(weitz_marginal(m, none, v, m.n() + 1) == doctest::Approx(enumerated).epsilon(1e-9));
        }
    }
}

TEST_CASE("weitz marginal honors pinnings") {
    auto path = make_hardcore(make_graph(3, {{0, 1}, {1, 2}}), 4.0);
    Pinning pin;
    pin.assignments[0] = 1;  // occupied: vertex 1 forced out
    CHECK(weitz_marginal(path, pin, 1, 10) == doctest::Approx(0.0));
    CHECK(weitz_marginal(path, pin, 2, 10) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK_THROWS_AS(weitz_marginal(path, pin, 0, 10), std::invalid_argument);
}

TEST_CASE("ising saw marginal equals enumeration") {
    for (int idx = 0; idx < 10; ++idx) {
        auto g = oracles::random_graph(8, 3, 4000 + static_cast<uint64_t>(idx));
        std::vector<double> h(static_cast<size_t>(g.n_vertices));
        CounterRng rng(5, static_cast<uint64_t>(idx), 0);
        for (auto& x : h) x = -0.4 + 0.8 * rng.next_double();
        auto m = make_ising(g, -0.5 + 0.1 * idx, h);
        auto d = exact_distribution(m);
        Pinning none;
        for (int v = 0; v < std::min(2, m.n()); ++v) {
            double enumerated = 0.0;
            for (uint32_t mask = 0; mask < d.log_probs.size(); ++mask)
                if (mask >> v & 1) enumerated += d.prob(mask);
            CHECK(ising_saw_marginal(m, none, v, m.n() + 1) == doctest::Approx(enumerated).epsilon(1e-9));
        }
    }
}

TEST_CASE("estimate_z_s_theta against the exact oracle") {
    // Hardcore edge, S = empty and S = {u}.
    auto m = make_hardcore(make_graph(2, {{0, 1}}), 4.0);
    std::vector<int> empty_set, su = {0};
    auto e1 = estimate_z_s_theta(m, empty_set, 0.5, 0.01);
    CHECK(std::fabs(e1.log_z - z_s_theta_exact(m, empty_set, 0.5)) < 0.01);
    auto e2 = estimate_z_s_theta(m, su, 0.5, 0.01);
    CHECK(e2.log_z == doctest::Approx(z_s_theta_exact(m, su, 0.5)).epsilon(1e-9));
    std::vector<int> both = {0, 1};
    CHECK(estimate_z_s_theta(m, both, 0.5, 0.01).empty);

    // Trees: telescoping with full-depth marginals reproduces the oracle to 1e-10.
    for (int depth : {2, 3}) {
        auto tree = tree_graph_ary(2, depth);
        auto mt = make_hardcore(tree, 2.0);
        std::vector<int> s = {0};
        auto est = estimate_z_s_theta(mt, s, 0.5, 1e-9);
        CHECK(est.log_z == doctest::Approx(z_s_theta_exact(mt, s, 0.5)).epsilon(1e-10));
    }

    // General small graphs at strongly subcritical tilt.
    for (int idx = 0; idx < 6; ++idx) {
        auto g = oracles::random_graph(10, 3, 5000 + static_cast<uint64_t>(idx));
        auto mh = make_hardcore(g, 2.0);
        std::vector<int> s;
        if (idx % 2) s.push_back(idx % g.n_vertices);
        auto est = estimate_z_s_theta(mh, s, 0.5, 0.01);
        if (!est.empty) CHECK(std::fabs(est.log_z - z_s_theta_exact(mh, s, 0.5)) < 0.01);
    }
}

TEST_CASE("estimate_z_s_theta for the Ising path") {
    for (int idx = 0; idx < 4; ++idx) {
        auto g = oracles::random_graph(8, 3, 6000 + static_cast<uint64_t>(idx));
        auto m = make_ising(g, beta_c(3));
        std::vector<int> s;
        if (idx % 2) s = {0, (idx + 2) % g.n_vertices};
        auto est = estimate_z_s_theta(m, s, 0.5, 0.01);
        CHECK(std::fabs(est.log_z - z_s_theta_exact(m, s, 0.5)) < 0.01);
    }
}

TEST_CASE("full-cover S on an empty graph is exact by construction") {
    auto m = make_hardcore(make_graph(5, {}), 3.0);
    std::vector<int> all = {0, 1, 2, 3, 4};
    auto est = estimate_z_s_theta(m, all, 0.4, 0.01);
    CHECK(est.log_z == doctest::Approx(z_s_theta_exact(m, all, 0.4)).epsilon(1e-12));
}

TEST_CASE("decomposition identity: k = n+1 with the exact oracle equals log Z") {
    for (int idx = 0; idx < 8; ++idx) {
        auto g = oracles::random_graph(3 + idx, 3, 7000 + static_cast<uint64_t>(idx));
        SpinModel m = idx % 2 ? SpinModel(make_ising(g, 0.3, {})) : make_hardcore(g, 1.3);
        CountingPlan plan;
        plan.theta = 0.4;
        plan.epsilon = 0.05;
        plan.epsilon0 = 0.0;
        plan.k = m.n() + 1;
        plan.oracle = CountingOracle::Exact;
        auto cert = deterministic_count(m, plan);
        CHECK(cert.log_z_hat == doctest::Approx(log_partition(m).value).epsilon(1e-10));
    }
}

TEST_CASE("truncation is monotone in k and the truncation-only error is within epsilon") {
    auto g = oracles::random_regular_graph(10, 3, 17);
    auto m = make_hardcore(g, lambda_c(3));
    double log_z = log_partition(m).value;
    double prev = kNegInf;
    for (int k = 1; k <= m.n() + 1; ++k) {
        CountingPlan plan;
        plan.theta = 0.5;
        plan.epsilon = 0.05;
        plan.epsilon0 = 0.0;
        plan.k = k;
        plan.oracle = CountingOracle::Exact;
        auto cert = deterministic_count(m, plan);
        CHECK(cert.log_z_hat >= prev - 1e-12);
        prev = cert.log_z_hat;
    }
    // Exact-oracle run at the planned k: |Z_hat/Z - 1| <= epsilon.
    auto plan = make_counting_plan(m.n(), 0.5, 0.05, 0.0, CountingOracle::Exact);
    auto cert = deterministic_count(m, plan);
    CHECK(std::fabs(std::exp(cert.log_z_hat - log_z) - 1.0) <= 0.05);
}

TEST_CASE("empty graph: the decomposition is an identity") {
    auto m = make_hardcore(make_graph(6, {}), 2.2);
    auto plan = make_counting_plan(6, 0.5, 0.05, 0.05);
    plan.oracle = CountingOracle::Exact;
    plan.k = 7;
    auto cert = deterministic_count(m, plan);
    CHECK(cert.log_z_hat == doctest::Approx(6.0 * std::log(3.2)).epsilon(1e-10));
}

TEST_CASE("weitz-oracle counting on critical 3-regular instances") {
    auto g = oracles::random_regular_graph(12, 3, 23);
    auto m = make_hardcore(g, lambda_c(3));
    auto plan = make_counting_plan(m.n(), 0.5, 0.05, 0.05);
    auto cert = deterministic_count(m, plan);
    double log_z = log_partition(m).value;
    CHECK(std::fabs(std::exp(cert.log_z_hat - log_z) - 1.0) <= 0.1);
}
