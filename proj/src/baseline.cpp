#include "ccot/baseline.hpp"

#include <stdexcept>

namespace ccot {

BaselineResult classic_ce(const CostMatrix& C) {
    if (C.m <= 0) throw std::invalid_argument("classic_ce: target set is empty");
    if (C.n <= 0) throw std::invalid_argument("classic_ce: source set is empty");
    BaselineResult out;
    out.match.resize(static_cast<std::size_t>(C.n));
    out.cost_per_source.resize(static_cast<std::size_t>(C.n));
    double total = 0.0;
    for (int i = 0; i < C.n; ++i) {
        int best = 0;
        double best_cost = C.at(i, 0);
        for (int j = 1; j < C.m; ++j) {
            const double c = C.at(i, j);
            if (c < best_cost) {  // strict: ties keep the lowest index
                best_cost = c;
                best = j;
            }
        }
        out.match[static_cast<std::size_t>(i)] = best;
        out.cost_per_source[static_cast<std::size_t>(i)] = best_cost;
        total += best_cost;
    }
    out.mean_cost = total / C.n;
    return out;
}

}  // namespace ccot
