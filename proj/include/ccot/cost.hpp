#pragma once

#include <string>
#include <vector>

#include "ccot/measures.hpp"

namespace ccot {

enum class CostKind {
    squared_euclidean,  // |x - y|^2
    euclidean,          // |x - y|
    p_power,            // |x - y|^p, p > 1
    l1,                 // |x1 - y1| + |x2 - y2|
};

CostKind cost_kind_from_string(const std::string& s);
std::string to_string(CostKind kind);

// Dense pairwise modification costs between a source and a target point set.
struct CostMatrix {
    int n = 0, m = 0;
    CostKind kind = CostKind::squared_euclidean;
    double p = 2.0;  // exponent, meaningful for p_power only
    std::vector<double> v;

    double& at(int i, int j) { return v[static_cast<std::size_t>(i) * m + j]; }
    double at(int i, int j) const { return v[static_cast<std::size_t>(i) * m + j]; }

    double mean() const;
    double max() const;
};

// values[i, j] = kind-specific cost between src[i] and tgt[j].  p_power
// requires p > 1 (strict convexity); use euclidean for the p = 1 case.
CostMatrix build_cost(const std::vector<Vec2>& src, const std::vector<Vec2>& tgt,
                      CostKind kind, double p = 2.0);

// Discounted-time reformulation: entrywise 1 - gamma^(c / budget), a
// strictly increasing map of c into [0, 1).  Requires gamma in (0, 1) and
// budget > 0.
CostMatrix effective_cost(const CostMatrix& c, double gamma, double budget);

}  // namespace ccot
