#pragma once

#include <vector>

#include "ccot/cost.hpp"
#include "ccot/measures.hpp"
#include "ccot/sinkhorn.hpp"

namespace ccot {

// Expected cost of a coupling: sum over entries of plan[i,j] * C[i,j].
double transport_cost(const TransportPlan& plan, const CostMatrix& C);

// Percentage increase of a collective plan's cost over the per-individual
// baseline: 100 (cce - baseline) / baseline.  Throws std::invalid_argument
// unless baseline_cost > 0.
double extra_cost_percent(double cce_cost, double baseline_cost);

// KL(m || q) after renormalizing both weight vectors to total mass 1, with
// the convention 0 log 0 = 0.  Throws std::invalid_argument when some
// m_i > 0 sits where q_i = 0 (support violation) or either vector has no
// mass.
double kl_divergence(const std::vector<double>& marginal, const std::vector<double>& q);

// p-Wasserstein distance estimated by an entropic solve under d^p ground
// cost: (plan cost)^(1/p).  Entropic smoothing biases the value upward on
// the order of epsilon.  Point-cloud and grid overloads; the grid overload
// compares two densities on the same domain using their nonzero cells.
double wasserstein_estimate(const DiscreteMeasure& p, const DiscreteMeasure& q, double power,
                            double epsilon);
double wasserstein_estimate(const GridDensity& p, const GridDensity& q, double power,
                            double epsilon);

}  // namespace ccot
