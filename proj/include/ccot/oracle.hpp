#pragma once

#include <vector>

#include "ccot/cost.hpp"

namespace ccot {

struct AssignmentResult {
    std::vector<int> perm;  // source i is matched to target perm[i]
    double cost = 0.0;      // mean of the selected entries: the cost of the
                            // uniform-weight coupling induced by perm
};

// Exact optimum over all permutations by full enumeration, for square cost
// matrices with n <= 8 (throws "oracle scale exceeded" beyond that).  Ties
// resolve to the lexicographically smallest permutation.  An optimal
// coupling between uniform n-point measures is a permutation matrix, so
// this is the exact OT optimum for uniform weights.
AssignmentResult assignment_oracle(const CostMatrix& c);

// Independent O(n^3) shortest-augmenting-path assignment solver, usable at
// sizes the enumeration oracle refuses.  Also exposes the dual potentials
// it maintains: u[i] + v[j] <= c[i, j] for all pairs, with equality on
// matched edges, so (u, v) certify optimality.
struct HungarianResult {
    std::vector<int> perm;
    double cost = 0.0;  // mean of the selected entries, as above
    std::vector<double> u, v;
};
HungarianResult hungarian_assignment(const CostMatrix& c);

// Best lower bound on the unregularized OT cost found from c-feasible dual
// potentials (weak duality makes any returned value a true bound).  Uniform
// equal-size instances get the exact optimum via the Hungarian duals; other
// weightings use deterministic multi-start coordinate ascent, which is
// valid at any size but not guaranteed tight.
double tiny_lp_bound(const std::vector<double>& p, const std::vector<double>& q,
                     const CostMatrix& c);

}  // namespace ccot
