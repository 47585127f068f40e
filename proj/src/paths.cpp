#include "ccot/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccot {

GridDensity interpolate_measure(const GridDensity& p, const GridMap& map, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("interpolate_measure: t must lie in [0, 1]");
    }
    if (!p.dom.same_grid(map.x.dom)) {
        throw std::invalid_argument("interpolate_measure: map and density live on different domains");
    }
    // Blending the map toward the identity and reusing the splatting kernel
    // keeps every frame mass-conserving by construction.
    const Domain& dom = p.dom;
    GridMap blended{Grid(dom), Grid(dom)};
    for (int i = 0; i < dom.nx; ++i) {
        for (int j = 0; j < dom.ny; ++j) {
            const Vec2 c = dom.center(i, j);
            blended.x.at(i, j) = (1.0 - t) * c.x + t * map.x.at(i, j);
            blended.y.at(i, j) = (1.0 - t) * c.y + t * map.y.at(i, j);
        }
    }
    return push_density(p, blended);
}

PathFrames make_frames(const GridDensity& p, const GridMap& map, int k) {
    if (k < 2) throw std::invalid_argument("make_frames: need at least two frames");
    PathFrames out;
    out.times.reserve(static_cast<std::size_t>(k));
    out.frames.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const double t = static_cast<double>(j) / (k - 1);
        out.times.push_back(t);
        out.frames.push_back(interpolate_measure(p, map, t));
    }
    return out;
}

std::vector<Vec2> trajectory(const Vec2& x, const GridMap& map, int k) {
    if (k < 2) throw std::invalid_argument("trajectory: need at least two points");
    const Vec2 target = evaluate_map(map, x);
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const double t = static_cast<double>(j) / (k - 1);
        pts.push_back({(1.0 - t) * x.x + t * target.x, (1.0 - t) * x.y + t * target.y});
    }
    return pts;
}

}  // namespace ccot
