#include "doctest.h"

#include <cmath>
#include <vector>

#include "ccot/cost.hpp"
#include "ccot/errors.hpp"
#include "ccot/oracle.hpp"
#include "ccot/rng.hpp"
#include "ccot/sinkhorn.hpp"

using namespace ccot;

namespace {

CostMatrix matrix(int n, int m, std::vector<double> entries) {
    CostMatrix c;
    c.n = n;
    c.m = m;
    c.v = std::move(entries);
    return c;
}

std::vector<Vec2> uniform_points(std::uint64_t seed, int n) {
    Rng rng(seed);
    std::vector<Vec2> pts(n);
    for (auto& p : pts) {
        p.x = rng.uniform();
        p.y = rng.uniform();
    }
    return pts;
}

double plan_l1(const TransportPlan& a, const TransportPlan& b) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.matrix.size(); ++i)
        total += std::abs(a.matrix[i] - b.matrix[i]);
    return total;
}

}  // namespace

TEST_CASE("single-atom instance is solved exactly") {
    const CostMatrix c = matrix(1, 1, {0.7});
    SinkhornParams params;
    const TransportPlan plan = sinkhorn({1.0}, {1.0}, c, params);
    CHECK(plan.converged);
    CHECK(plan.matrix[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(plan.total_cost == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(plan.mass == doctest::Approx(1.0).epsilon(1e-12));
}

// The symmetric two-atom instance has the closed-form fixed point
// off-diagonal mass 1 / (2 (e^(1/eps) + 1)); frozen at eps = 0.5.
TEST_CASE("two-atom fixed point matches the closed form") {
    const CostMatrix c = matrix(2, 2, {0.0, 1.0, 1.0, 0.0});
    SinkhornParams params;
    params.epsilon = 0.5;
    const TransportPlan plan = sinkhorn({0.5, 0.5}, {0.5, 0.5}, c, params);
    CHECK(plan.converged);
    CHECK(plan.matrix[1] == doctest::Approx(0.059601461011058773).epsilon(1e-9));
    CHECK(plan.total_cost == doctest::Approx(0.11920292202211755).epsilon(1e-9));
}

TEST_CASE("converged plans satisfy both marginals") {
    const auto src = uniform_points(311, 8);
    const auto tgt = uniform_points(312, 9);
    const CostMatrix c = build_cost(src, tgt, CostKind::squared_euclidean);
    std::vector<double> p(8, 1.0 / 8.0), q(9, 1.0 / 9.0);
    SinkhornParams params;
    params.epsilon = 0.05 * c.mean();
    const TransportPlan plan = sinkhorn(p, q, c, params);
    REQUIRE(plan.converged);
    CHECK(plan.residual <= params.tolerance);
    for (int i = 0; i < 8; ++i) CHECK(plan.src_marginal[i] == doctest::Approx(p[i]).epsilon(1e-7));
    for (int j = 0; j < 9; ++j) CHECK(plan.tgt_marginal[j] == doctest::Approx(q[j]).epsilon(1e-7));
    CHECK(plan.mass == doctest::Approx(1.0).epsilon(1e-9));
    // Entries reconstruct from the dual potentials.
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 9; ++j) {
            const double rebuilt = std::exp(
                (plan.potential_src[i] + plan.potential_tgt[j] - c.at(i, j)) / plan.epsilon);
            CHECK(plan.matrix[static_cast<std::size_t>(i) * 9 + j] ==
                  doctest::Approx(rebuilt).epsilon(1e-9));
        }
    }
}

TEST_CASE("identical seeds give bit-identical plans") {
    const auto src = uniform_points(400, 6);
    const auto tgt = uniform_points(401, 6);
    const CostMatrix c = build_cost(src, tgt, CostKind::squared_euclidean);
    const std::vector<double> w(6, 1.0 / 6.0);
    SinkhornParams params;
    params.epsilon = 0.02 * c.mean();
    const TransportPlan a = sinkhorn(w, w, c, params);
    const TransportPlan b = sinkhorn(w, w, c, params);
    CHECK(a.matrix == b.matrix);
    CHECK(a.total_cost == b.total_cost);
}

TEST_CASE("log-domain and dense paths agree at moderate epsilon") {
    const auto src = uniform_points(402, 5);
    const auto tgt = uniform_points(403, 5);
    const CostMatrix c = build_cost(src, tgt, CostKind::squared_euclidean);
    const std::vector<double> w(5, 0.2);
    SinkhornParams off;
    off.epsilon = 0.2 * c.mean();
    off.log_domain = LogDomainMode::off;
    off.anneal = false;
    SinkhornParams on = off;
    on.log_domain = LogDomainMode::on;
    const TransportPlan a = sinkhorn(w, w, c, off);
    const TransportPlan b = sinkhorn(w, w, c, on);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(plan_l1(a, b) < 1e-7);
}

TEST_CASE("cost decreases toward the assignment optimum as epsilon shrinks") {
    const auto src = uniform_points(404, 6);
    const auto tgt = uniform_points(405, 6);
    const CostMatrix c = build_cost(src, tgt, CostKind::squared_euclidean);
    const std::vector<double> w(6, 1.0 / 6.0);
    const double best = assignment_oracle(c).cost;
    double prev = 1e300;
    for (double f : {0.2, 0.1, 0.05, 0.02}) {
        SinkhornParams params;
        params.epsilon = f * c.mean();
        const TransportPlan plan = sinkhorn(w, w, c, params);
        CHECK(plan.total_cost >= best - 1e-12);
        CHECK(plan.total_cost <= prev + 1e-10);
        prev = plan.total_cost;
    }
    CHECK(prev == doctest::Approx(best).epsilon(0.02));
}

TEST_CASE("feasible dual values never exceed a plan's cost") {
    const auto src = uniform_points(406, 7);
    const auto tgt = uniform_points(407, 7);
    const CostMatrix c = build_cost(src, tgt, CostKind::squared_euclidean);
    const std::vector<double> w(7, 1.0 / 7.0);
    SinkhornParams params;
    params.epsilon = 0.05 * c.mean();
    const TransportPlan plan = sinkhorn(w, w, c, params);

    // Make the entropic potentials c-feasible by a conjugation pass before
    // invoking weak duality.
    std::vector<double> psi(7), phi(7);
    for (int j = 0; j < 7; ++j) {
        double best = 1e300;
        for (int i = 0; i < 7; ++i) best = std::min(best, c.at(i, j) - plan.potential_src[i]);
        psi[j] = best;
    }
    for (int i = 0; i < 7; ++i) {
        double best = 1e300;
        for (int j = 0; j < 7; ++j) best = std::min(best, c.at(i, j) - psi[j]);
        phi[i] = best;
    }
    const double dual = dual_objective(phi, psi, w, w);
    CHECK(dual <= plan.total_cost + 1e-10);
    const double exact = assignment_oracle(c).cost;
    CHECK(dual <= exact + 1e-10);
}

TEST_CASE("sinkhorn validates its inputs") {
    const CostMatrix c = matrix(2, 2, {0.0, 1.0, 1.0, 0.0});
    SinkhornParams params;
    CHECK_THROWS(sinkhorn({0.5, 0.5, 0.0}, {0.5, 0.5}, c, params));
    CHECK_THROWS(sinkhorn({0.7, 0.3}, {0.5, 0.4}, c, params));  // unequal totals
    params.epsilon = 0.0;
    CHECK_THROWS(sinkhorn({0.5, 0.5}, {0.5, 0.5}, c, params));
}

TEST_CASE("huge marginal penalties recover the balanced plan") {
    const auto src = uniform_points(408, 6);
    const auto tgt = uniform_points(409, 6);
    const CostMatrix c = build_cost(src, tgt, CostKind::squared_euclidean);
    const std::vector<double> w(6, 1.0 / 6.0);
    SinkhornParams sp;
    sp.epsilon = 0.05 * c.mean();
    const TransportPlan balanced = sinkhorn(w, w, c, sp);
    UnbalancedParams up;
    up.epsilon = sp.epsilon;
    up.lambda1 = up.lambda2 = 1e6 * up.epsilon;
    const TransportPlan relaxed = unbalanced_sinkhorn(w, w, c, up);
    CHECK(plan_l1(balanced, relaxed) < 1e-4);
    CHECK(relaxed.mass == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("dropping the target penalty frees the target marginal") {
    const auto src = uniform_points(410, 6);
    const auto tgt = uniform_points(411, 8);
    const CostMatrix c = build_cost(src, tgt, CostKind::squared_euclidean);
    std::vector<double> p(6, 1.0 / 6.0), q(8, 1.0 / 8.0);
    UnbalancedParams up;
    up.epsilon = 0.05 * c.mean();
    up.lambda1 = 1.0;
    up.lambda2 = 0.0;
    const TransportPlan plan = unbalanced_sinkhorn(p, q, c, up);
    // v stays identically 1, so the target potential vanishes.
    for (double g : plan.potential_tgt) CHECK(g == doctest::Approx(0.0).epsilon(1e-12));
    // The source marginal stays close to p (large effective anchor), while
    // the target marginal is whatever the kernel rows produce.
    double src_err = 0.0;
    for (int i = 0; i < 6; ++i) src_err += std::abs(plan.src_marginal[i] - p[i]);
    CHECK(src_err < 0.05);
}

TEST_CASE("unbalanced mass responds to the penalty asymmetry") {
    const auto src = uniform_points(412, 5);
    const auto tgt = uniform_points(413, 5);
    const CostMatrix c = build_cost(src, tgt, CostKind::squared_euclidean);
    const std::vector<double> w(5, 0.2);
    UnbalancedParams up;
    up.epsilon = 0.1 * c.mean();
    up.lambda1 = 1.0;
    up.lambda2 = 0.25;
    const TransportPlan plan = unbalanced_sinkhorn(w, w, c, up);
    CHECK(plan.mass > 0.0);
    CHECK(std::isfinite(plan.total_cost));
    // Softer penalties shed transported mass relative to the balanced case.
    CHECK(plan.mass < 1.0 + 1e-9);
}

TEST_CASE("recommend picks the argmax row entry with ties to the lowest index") {
    TransportPlan plan;
    plan.n = 2;
    plan.m = 3;
    plan.matrix = {0.1, 0.3, 0.3,  //
                   0.0, 0.0, 0.0};
    CHECK(recommend(plan, 0, RecommendMode::argmax) == 1);
    CHECK_THROWS_AS(recommend(plan, 1, RecommendMode::argmax), NumericalError);
}

TEST_CASE("sampled recommendations are deterministic per seed and within support") {
    TransportPlan plan;
    plan.n = 1;
    plan.m = 4;
    plan.matrix = {0.4, 0.0, 0.35, 0.25};
    const int first = recommend(plan, 0, RecommendMode::sample, 5);
    CHECK(first == recommend(plan, 0, RecommendMode::sample, 5));
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        const int j = recommend(plan, 0, RecommendMode::sample, seed);
        CHECK(j != 1);  // zero-mass column is never drawn
        CHECK(j >= 0);
        CHECK(j < 4);
    }
}
