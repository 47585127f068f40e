#pragma once

#include <functional>
#include <string>

#include "ccot/measures.hpp"

namespace ccot {

// Real-valued score whose sign is the classification.  The decision
// boundary is the zero level set.
struct ScoreFunction {
    std::string id;  // "f1", "f2", "f3", or a caller-chosen label
    std::function<double(const Vec2&)> fn;
};

// Built-in benchmark classifiers:
//   f1(x) = x1 + x2 + (1/5) sin(2 pi x1) - 1   (wavy diagonal boundary)
//   f2(x) = x1 + x2 - 1                        (straight diagonal boundary)
//   f3(x) = (x1 - 0.5)^2 + (x2 - 0.5)^2 - 1/9  (circular boundary)
// Throws ConfigError on an unknown id.
ScoreFunction builtin_score(const std::string& id);

ScoreFunction custom_score(std::string label, std::function<double(const Vec2&)> fn);

double score(const ScoreFunction& f, const Vec2& x);

// sign(score): +1 for positive class, -1 for negative; a score of exactly 0
// labels +1 (documented tie-break).
int label(const ScoreFunction& f, const Vec2& x);

// Score evaluated at every cell center.
Grid score_grid(const ScoreFunction& f, const Domain& dom);

struct ThresholdResult {
    double r = 0.0;
    double achieved_prob = 0.0;
};

// Discrete infimum threshold: cells with positive score are sorted by
// (score, linear index) ascending and accumulated until the running mass
// first exceeds delta; r is the score of the last cell taken.  achieved_prob
// is therefore in (delta, delta + max accepted cell mass].  Throws
// NumericalError when the total positive-score mass does not exceed delta
// (the confidence region is infeasible).
ThresholdResult confidence_threshold(const GridDensity& P, const ScoreFunction& f, double delta);

struct ConfidenceRegion {
    double r = 0.0;
    double achieved_prob = 0.0;
    Mask source_mask;  // cells with score < 0
    Mask target_mask;  // accepted cells with score in (0, r]
};

// Source region (negative scores) plus the delta-confidence target band.
// The target mask is the exact accumulation prefix behind
// confidence_threshold: cells scoring below r are all included, and a group
// of cells tied at r is included only up to the mass crossing, lowest linear
// index first.  This keeps achieved_prob within one cell of delta even when
// the score function produces large tie groups, and makes the region
// monotone in delta.  Throws NumericalError when no cell scores negative
// ("nothing to explain") or when the region is infeasible.
ConfidenceRegion build_regions(const GridDensity& P, const ScoreFunction& f, double delta);

}  // namespace ccot
