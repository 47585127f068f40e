#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ccot/cost.hpp"
#include "ccot/measures.hpp"
#include "ccot/metrics.hpp"
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

}  // namespace

TEST_CASE("transport cost is the plan-weighted sum of matrix entries") {
    TransportPlan plan;
    plan.n = 2;
    plan.m = 2;
    plan.matrix = {0.25, 0.25, 0.0, 0.5};
    const CostMatrix c = matrix(2, 2, {1.0, 2.0, 3.0, 4.0});
    CHECK(transport_cost(plan, c) == doctest::Approx(0.25 + 0.5 + 2.0).epsilon(1e-15));
    CHECK_THROWS_AS(transport_cost(plan, matrix(2, 3, std::vector<double>(6, 1.0))),
                    std::invalid_argument);
}

TEST_CASE("extra cost percent compares against the baseline") {
    CHECK(extra_cost_percent(1.2, 1.0) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(extra_cost_percent(0.9, 1.0) == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(extra_cost_percent(2.0, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(extra_cost_percent(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(extra_cost_percent(1.0, -0.5), std::invalid_argument);
}

// KL([1/2,1/2] || [1/4,3/4]) = 0.5 log 2 + 0.5 log(2/3), frozen from an
// independent high-precision evaluation.
TEST_CASE("kl divergence matches a frozen hand value") {
    const double kl = kl_divergence({0.5, 0.5}, {0.25, 0.75});
    CHECK(kl == doctest::Approx(0.14384103622589042).epsilon(1e-12));
}

TEST_CASE("kl divergence renormalizes, zeroes vanish, equality gives zero") {
    // Unnormalized inputs are scaled to probabilities first: [1,1] ~ [2,6]
    // is the same instance as above.
    CHECK(kl_divergence({2.0, 2.0}, {2.0, 6.0}) ==
          doctest::Approx(0.14384103622589042).epsilon(1e-12));

    // 0 log 0 = 0: zero-mass cells contribute nothing.
    CHECK(kl_divergence({0.5, 0.5, 0.0}, {0.25, 0.7, 0.05}) ==
          doctest::Approx(0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.7)).epsilon(1e-12));

    CHECK(kl_divergence({0.3, 0.7}, {0.3, 0.7}) == doctest::Approx(0.0).epsilon(1e-14));
    using VecPair = std::pair<std::vector<double>, std::vector<double>>;
    const VecPair bad[] = {{{0.5, 0.5}, {1.0, 0.0}},
                           {{1.0}, {1.0, 1.0}},
                           {{0.0, 0.0}, {0.5, 0.5}},
                           {{-0.1, 1.1}, {0.5, 0.5}}};
    for (const auto& pair : bad) {
        CHECK_THROWS_AS(kl_divergence(pair.first, pair.second), std::invalid_argument);
    }
    CHECK(kl_divergence({0.9, 0.1}, {0.5, 0.5}) > 0.0);
}

TEST_CASE("singleton clouds recover the exact pairwise distance") {
    DiscreteMeasure p, q;
    p.points = {{0.1, 0.2}};
    p.weights = {1.0};
    q.points = {{0.4, 0.6}};
    q.weights = {1.0};
    const double d = std::hypot(0.3, 0.4);
    CHECK(wasserstein_estimate(p, q, 1.0, 0.01) == doctest::Approx(d).epsilon(1e-9));
    CHECK(wasserstein_estimate(p, q, 2.0, 0.01) == doctest::Approx(d).epsilon(1e-9));
}

TEST_CASE("the estimate is symmetric and shrinks toward zero for equal clouds") {
    DiscreteMeasure p, q;
    p.points = {{0.2, 0.2}, {0.2, 0.8}, {0.65, 0.4}};
    p.weights = {0.4, 0.3, 0.3};
    q.points = {{0.3, 0.25}, {0.75, 0.75}};
    q.weights = {0.5, 0.5};
    const double eps = 5e-3;
    const double ab = wasserstein_estimate(p, q, 2.0, eps);
    const double ba = wasserstein_estimate(q, p, 2.0, eps);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-6));
    CHECK(ab > 0.0);
    // Self-distance is pure entropic bias, far below the cross distance.
    const double self = wasserstein_estimate(p, p, 2.0, eps);
    CHECK(self < 0.3 * ab);
}

TEST_CASE("grid estimates agree with the matching point clouds") {
    Domain dom;
    dom.nx = dom.ny = 8;
    GridDensity a(dom), b(dom);
    a.at(1, 1) = 0.6;
    a.at(2, 5) = 0.4;
    b.at(6, 6) = 1.0;
    const double eps = 5e-3;
    DiscreteMeasure pa, pb;
    pa.points = {dom.center(1, 1), dom.center(2, 5)};
    pa.weights = {0.6, 0.4};
    pb.points = {dom.center(6, 6)};
    pb.weights = {1.0};
    const double from_grid = wasserstein_estimate(a, b, 2.0, eps);
    const double from_points = wasserstein_estimate(pa, pb, 2.0, eps);
    CHECK(from_grid == doctest::Approx(from_points).epsilon(1e-9));

    GridDensity other(Domain{0.0, 2.0, 0.0, 1.0, 8, 8});
    other.at(0, 0) = 1.0;
    CHECK_THROWS_AS(wasserstein_estimate(a, other, 2.0, eps), std::invalid_argument);
}

TEST_CASE("estimates respect the triangle-like ordering of separated blobs") {
    // Moving the target farther away increases the estimated distance.
    DiscreteMeasure p, near, far;
    p.points = {{0.1, 0.5}};
    p.weights = {1.0};
    near.points = {{0.4, 0.5}};
    near.weights = {1.0};
    far.points = {{0.9, 0.5}};
    far.weights = {1.0};
    const double eps = 1e-2;
    CHECK(wasserstein_estimate(p, near, 2.0, eps) < wasserstein_estimate(p, far, 2.0, eps));
}
