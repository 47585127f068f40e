#pragma once

#include <vector>

#include "ccot/cost.hpp"

namespace ccot {

// Per-source nearest-target assignment: each source independently picks the
// cheapest target, the classical individual-recourse rule.
struct BaselineResult {
    std::vector<int> match;              // match[i] = chosen target index
    std::vector<double> cost_per_source; // C[i, match[i]]
    double mean_cost = 0.0;
};

// For each source row of C, the target minimizing the cost; ties resolve to
// the lowest target index.  Throws std::invalid_argument when the target
// set is empty.
BaselineResult classic_ce(const CostMatrix& C);

}  // namespace ccot
