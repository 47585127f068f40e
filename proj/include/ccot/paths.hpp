#pragma once

#include <vector>

#include "ccot/bfm.hpp"
#include "ccot/measures.hpp"

namespace ccot {

// Displacement-interpolation frames between a source grid measure and its
// pushforward under a quadratic-cost transport map, plus per-point geodesic
// trajectories.  Frame j sits at times[j]; frames[0] is the source measure.
struct PathFrames {
    std::vector<double> times;
    std::vector<GridDensity> frames;
};

// Mass of each source cell splatted at (1-t) x + t T(x).  Total mass is
// preserved exactly by the bilinear deposit.  Throws std::invalid_argument
// when t is outside [0, 1] or the map lives on a different grid.
GridDensity interpolate_measure(const GridDensity& p, const GridMap& map, double t);

// k frames at times j/(k-1) for j = 0..k-1.  Requires k >= 2.
PathFrames make_frames(const GridDensity& p, const GridMap& map, int k);

// Straight-line constant-speed path from x to T(x) sampled at k equally
// spaced times.  Requires x inside the domain and k >= 2.
std::vector<Vec2> trajectory(const Vec2& x, const GridMap& map, int k);

}  // namespace ccot
