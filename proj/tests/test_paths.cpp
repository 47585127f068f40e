#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "ccot/bfm.hpp"
#include "ccot/measures.hpp"
#include "ccot/paths.hpp"
#include "ccot/rng.hpp"

using namespace ccot;

namespace {

Domain unit_domain(int nx, int ny) {
    Domain d;
    d.nx = nx;
    d.ny = ny;
    return d;
}

GridDensity blob(const Domain& dom, Vec2 mean, double var) {
    GaussianMixture gmm;
    gmm.components.push_back({mean, {var, var}, 1.0});
    return discretize(gmm, dom);
}

GridMap rough_map(const Domain& dom, std::uint64_t seed, double scale) {
    Rng rng(seed);
    Grid phi(dom);
    for (auto& x : phi.v) x = scale * (rng.uniform() - 0.5);
    return pushforward_map(phi);
}

}  // namespace

TEST_CASE("time zero returns the source and time one returns the pushforward") {
    const Domain dom = unit_domain(16, 16);
    const GridDensity p = blob(dom, {0.4, 0.5}, 0.02);
    const GridMap map = rough_map(dom, 21, 0.15);

    const GridDensity start = interpolate_measure(p, map, 0.0);
    for (std::size_t i = 0; i < p.v.size(); ++i)
        CHECK(start.v[i] == doctest::Approx(p.v[i]).epsilon(1e-12));

    const GridDensity end = interpolate_measure(p, map, 1.0);
    const GridDensity pushed = push_density(p, map);
    for (std::size_t i = 0; i < p.v.size(); ++i)
        CHECK(end.v[i] == doctest::Approx(pushed.v[i]).epsilon(1e-12));
}

TEST_CASE("every intermediate frame carries the full mass") {
    const Domain dom = unit_domain(20, 14);
    const GridDensity p = blob(dom, {0.3, 0.6}, 0.03);
    const GridMap map = rough_map(dom, 22, 0.2);
    for (double t : {0.12, 0.37, 0.5, 0.81}) {
        const GridDensity frame = interpolate_measure(p, map, t);
        CHECK(frame.sum() == doctest::Approx(p.sum()).epsilon(1e-13));
        for (double v : frame.v) CHECK(v >= 0.0);
    }
}

TEST_CASE("interpolation validates time and grids") {
    const Domain dom = unit_domain(8, 8);
    const GridDensity p = blob(dom, {0.5, 0.5}, 0.05);
    const GridMap map = rough_map(dom, 23, 0.1);
    CHECK_THROWS_AS(interpolate_measure(p, map, -0.001), std::invalid_argument);
    CHECK_THROWS_AS(interpolate_measure(p, map, 1.001), std::invalid_argument);
    const GridMap other = rough_map(unit_domain(8, 9), 24, 0.1);
    CHECK_THROWS_AS(interpolate_measure(p, other, 0.5), std::invalid_argument);
}

TEST_CASE("frames are evenly timed and bracketed by the endpoints") {
    const Domain dom = unit_domain(16, 16);
    const GridDensity p = blob(dom, {0.35, 0.35}, 0.02);
    const GridMap map = rough_map(dom, 25, 0.25);
    const int k = 5;
    const PathFrames pf = make_frames(p, map, k);
    REQUIRE(pf.times.size() == static_cast<std::size_t>(k));
    REQUIRE(pf.frames.size() == static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
        CHECK(pf.times[static_cast<std::size_t>(j)] ==
              doctest::Approx(static_cast<double>(j) / (k - 1)).epsilon(1e-15));
    for (std::size_t i = 0; i < p.v.size(); ++i)
        CHECK(pf.frames[0].v[i] == doctest::Approx(p.v[i]).epsilon(1e-12));
    const GridDensity pushed = push_density(p, map);
    for (std::size_t i = 0; i < p.v.size(); ++i)
        CHECK(pf.frames.back().v[i] == doctest::Approx(pushed.v[i]).epsilon(1e-12));
    CHECK_THROWS_AS(make_frames(p, map, 1), std::invalid_argument);
}

TEST_CASE("trajectories are straight constant-speed segments") {
    const Domain dom = unit_domain(16, 16);
    const GridMap map = rough_map(dom, 26, 0.2);
    const Vec2 x{0.31, 0.47};
    const int k = 7;
    const auto pts = trajectory(x, map, k);
    REQUIRE(pts.size() == static_cast<std::size_t>(k));
    CHECK(pts.front().x == doctest::Approx(x.x).epsilon(1e-14));
    CHECK(pts.front().y == doctest::Approx(x.y).epsilon(1e-14));
    const Vec2 target = evaluate_map(map, x);
    CHECK(pts.back().x == doctest::Approx(target.x).epsilon(1e-12));
    CHECK(pts.back().y == doctest::Approx(target.y).epsilon(1e-12));
    // Evenly spaced along the segment: equal consecutive steps.
    const double step0x = pts[1].x - pts[0].x;
    const double step0y = pts[1].y - pts[0].y;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        CHECK(pts[i + 1].x - pts[i].x == doctest::Approx(step0x).epsilon(1e-9));
        CHECK(pts[i + 1].y - pts[i].y == doctest::Approx(step0y).epsilon(1e-9));
    }
    CHECK_THROWS_AS(trajectory(x, map, 1), std::invalid_argument);
    CHECK_THROWS_AS(trajectory(Vec2{1.5, 0.5}, map, 4), std::invalid_argument);
}

TEST_CASE("the identity map leaves every frame equal to the source") {
    const Domain dom = unit_domain(12, 12);
    const GridDensity p = blob(dom, {0.5, 0.4}, 0.03);
    const GridMap identity = pushforward_map(Grid(dom));
    const PathFrames pf = make_frames(p, identity, 4);
    for (const auto& frame : pf.frames) {
        for (std::size_t i = 0; i < p.v.size(); ++i)
            CHECK(frame.v[i] == doctest::Approx(p.v[i]).epsilon(1e-12));
    }
}
