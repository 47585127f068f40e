#include "doctest.h"

#include <stdexcept>
#include <vector>

#include "ccot/baseline.hpp"
#include "ccot/cost.hpp"
#include "ccot/rng.hpp"

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

TEST_CASE("each source picks its cheapest target") {
    const CostMatrix c = matrix(3, 3,
                                {5.0, 1.0, 9.0,   //
                                 2.0, 8.0, 0.5,   //
                                 7.0, 7.0, 3.0});
    const BaselineResult r = classic_ce(c);
    REQUIRE(r.match.size() == 3);
    CHECK(r.match[0] == 1);
    CHECK(r.match[1] == 2);
    CHECK(r.match[2] == 2);
    CHECK(r.cost_per_source[0] == 1.0);
    CHECK(r.cost_per_source[1] == 0.5);
    CHECK(r.cost_per_source[2] == 3.0);
    CHECK(r.mean_cost == doctest::Approx((1.0 + 0.5 + 3.0) / 3.0).epsilon(1e-15));
}

TEST_CASE("exact ties resolve to the lowest target index") {
    const CostMatrix c = matrix(2, 4,
                                {4.0, 2.0, 2.0, 2.0,  //
                                 6.0, 6.0, 6.0, 6.0});
    const BaselineResult r = classic_ce(c);
    CHECK(r.match[0] == 1);
    CHECK(r.match[1] == 0);
}

TEST_CASE("a single target absorbs every source") {
    const CostMatrix c = matrix(3, 1, {0.9, 0.1, 0.5});
    const BaselineResult r = classic_ce(c);
    for (int i = 0; i < 3; ++i) CHECK(r.match[static_cast<std::size_t>(i)] == 0);
    CHECK(r.mean_cost == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("an empty target set is rejected") {
    CostMatrix c;
    c.n = 2;
    c.m = 0;
    CHECK_THROWS_AS(classic_ce(c), std::invalid_argument);
}

TEST_CASE("baseline never exceeds any other per-row choice") {
    Rng rng(9001);
    CostMatrix c;
    c.n = 6;
    c.m = 7;
    c.v.resize(42);
    for (auto& x : c.v) x = rng.uniform();
    const BaselineResult r = classic_ce(c);
    for (int i = 0; i < c.n; ++i) {
        for (int j = 0; j < c.m; ++j) {
            CHECK(r.cost_per_source[static_cast<std::size_t>(i)] <= c.at(i, j));
        }
    }
    double mean = 0.0;
    for (double x : r.cost_per_source) mean += x;
    mean /= 6.0;
    CHECK(r.mean_cost == doctest::Approx(mean).epsilon(1e-15));
}
