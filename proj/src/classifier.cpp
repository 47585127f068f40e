#include "ccot/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ccot/errors.hpp"

namespace ccot {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

ScoreFunction builtin_score(const std::string& id) {
    if (id == "f1") {
        return {"f1", [](const Vec2& p) {
                    return p.x + p.y + 0.2 * std::sin(kTwoPi * p.x) - 1.0;
                }};
    }
    if (id == "f2") {
        return {"f2", [](const Vec2& p) { return p.x + p.y - 1.0; }};
    }
    if (id == "f3") {
        return {"f3", [](const Vec2& p) {
                    return (p.x - 0.5) * (p.x - 0.5) + (p.y - 0.5) * (p.y - 0.5) - 1.0 / 9.0;
                }};
    }
    throw ConfigError("classifier: unknown id \"" + id + "\" (expected f1, f2, or f3)");
}

ScoreFunction custom_score(std::string label, std::function<double(const Vec2&)> fn) {
    if (!fn) throw std::invalid_argument("custom_score: empty callback");
    return {std::move(label), std::move(fn)};
}

double score(const ScoreFunction& f, const Vec2& x) { return f.fn(x); }

int label(const ScoreFunction& f, const Vec2& x) { return f.fn(x) >= 0.0 ? +1 : -1; }

Grid score_grid(const ScoreFunction& f, const Domain& dom) {
    dom.validate();
    Grid out(dom);
    for (int ix = 0; ix < dom.nx; ++ix) {
        for (int iy = 0; iy < dom.ny; ++iy) {
            out.at(ix, iy) = f.fn(dom.center(ix, iy));
        }
    }
    return out;
}

namespace {

struct Accumulation {
    double r = 0.0;
    double achieved = 0.0;
    std::vector<std::size_t> accepted;  // linear cell indices of the target prefix
};

// Shared core of confidence_threshold and build_regions: accumulate
// positive-score cells in (score, index) order until the mass first
// exceeds delta.
Accumulation accumulate_target(const Grid& scores, const GridDensity& P, double delta) {
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw std::invalid_argument("confidence level delta must lie in (0, 1)");
    }
    std::vector<std::pair<double, std::size_t>> positive;
    double positive_mass = 0.0;
    for (std::size_t i = 0; i < scores.v.size(); ++i) {
        if (scores.v[i] > 0.0) {
            positive.push_back({scores.v[i], i});
            positive_mass += P.v[i];
        }
    }
    if (!(positive_mass > delta)) {
        std::ostringstream msg;
        msg << "confidence region infeasible: positive-score mass " << positive_mass
            << " does not exceed delta " << delta;
        throw NumericalError(msg.str());
    }
    std::sort(positive.begin(), positive.end());
    Accumulation acc;
    for (const auto& [s, i] : positive) {
        acc.accepted.push_back(i);
        acc.achieved += P.v[i];
        acc.r = s;
        if (acc.achieved > delta) break;
    }
    return acc;
}

}  // namespace

ThresholdResult confidence_threshold(const GridDensity& P, const ScoreFunction& f, double delta) {
    const Grid scores = score_grid(f, P.dom);
    const Accumulation acc = accumulate_target(scores, P, delta);
    return {acc.r, acc.achieved};
}

ConfidenceRegion build_regions(const GridDensity& P, const ScoreFunction& f, double delta) {
    const Grid scores = score_grid(f, P.dom);
    const Accumulation acc = accumulate_target(scores, P, delta);

    ConfidenceRegion region;
    region.r = acc.r;
    region.achieved_prob = acc.achieved;
    region.source_mask = Mask(P.dom);
    region.target_mask = Mask(P.dom);
    for (std::size_t i = 0; i < scores.v.size(); ++i) {
        if (scores.v[i] < 0.0) region.source_mask.v[i] = 1;
    }
    for (std::size_t i : acc.accepted) region.target_mask.v[i] = 1;

    if (region.source_mask.count() == 0) {
        throw NumericalError("build_regions: nothing to explain (no cell scores negative)");
    }
    return region;
}

}  // namespace ccot
