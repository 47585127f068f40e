#pragma once

#include <cstdint>
#include <vector>

#include "ccot/cost.hpp"

namespace ccot {

enum class LogDomainMode {
    automatic,  // stabilize when epsilon < 1e-3 * max(C)
    off,        // plain multiplicative updates (errors on underflow)
    on,         // always compute in log space
};

struct SinkhornParams {
    double epsilon = 0.01;
    int max_iters = 10000;
    double tolerance = 1e-9;  // L1 marginal residual
    LogDomainMode log_domain = LogDomainMode::automatic;
    // Log-domain solves walk epsilon down a halving schedule with warm
    // starts before converging at the target value; identical fixed point,
    // far fewer iterations at small epsilon.
    bool anneal = true;
};

struct UnbalancedParams {
    double epsilon = 0.01;
    double lambda1 = 1.0;  // source-marginal KL penalty weight
    double lambda2 = 1.0;  // target-marginal KL penalty weight
    int max_iters = 10000;
    double tolerance = 1e-9;  // max displacement of (log u, log v) per sweep
    LogDomainMode log_domain = LogDomainMode::automatic;
};

struct TransportPlan {
    int n = 0, m = 0;
    std::vector<double> matrix;  // n*m row-major, nonnegative
    std::vector<double> src_marginal, tgt_marginal;
    // Dual potentials with plan[i,j] = exp((f[i] + g[j] - C[i,j]) / epsilon).
    std::vector<double> potential_src, potential_tgt;
    double total_cost = 0.0;  // <plan, C>
    double mass = 0.0;        // total plan mass (1 for balanced solves)
    double epsilon = 0.0;
    int iterations_used = 0;
    double residual = 0.0;
    bool converged = false;
};

// Balanced entropic OT: plan = diag(u) K diag(v) with Gibbs kernel
// K = exp(-C / epsilon), alternating exact marginal fits until the L1
// marginal residual drops below tolerance or max_iters is spent (the
// converged flag reports which).  Requires strictly positive probability
// weights of equal total; callers drop zero-weight atoms first.
TransportPlan sinkhorn(const std::vector<double>& p, const std::vector<double>& q,
                       const CostMatrix& c, const SinkhornParams& params);

// Marginal-relaxed variant: u <- (p / Kv)^(l1/(eps+l1)),
// v <- (q / K'u)^(l2/(eps+l2)).  Marginals are reported, not enforced;
// lambda -> infinity recovers the balanced updates, lambda2 = 0 leaves v
// identically 1 (target marginal unconstrained).  Weights may contain
// zeros; totals must be positive.
TransportPlan unbalanced_sinkhorn(const std::vector<double>& p, const std::vector<double>& q,
                                  const CostMatrix& c, const UnbalancedParams& params);

// Kantorovich dual value E_p[phi] + E_q[psi].  For c-feasible potentials
// (phi_i + psi_j <= C_ij) this never exceeds any plan's cost, so it serves
// as an optimality certificate.
double dual_objective(const std::vector<double>& phi, const std::vector<double>& psi,
                      const std::vector<double>& p, const std::vector<double>& q);

enum class RecommendMode { argmax, sample };

// Counterfactual recommendation for source point i: the argmax of row i
// (ties to the lowest index), or a draw from the normalized row when
// sampling.  Throws NumericalError on an all-zero row (possible under
// marginal-relaxed plans): that source point is unserved.
int recommend(const TransportPlan& plan, int i, RecommendMode mode = RecommendMode::argmax,
              std::uint64_t seed = 0);

}  // namespace ccot
