#include "ccot/sinkhorn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ccot/errors.hpp"
#include "ccot/rng.hpp"

namespace ccot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_weights(const std::vector<double>& p, const std::vector<double>& q,
                   const CostMatrix& c, bool strictly_positive) {
    if (static_cast<int>(p.size()) != c.n || static_cast<int>(q.size()) != c.m) {
        throw std::invalid_argument("sinkhorn: weight lengths disagree with the cost matrix");
    }
    double ps = 0.0, qs = 0.0;
    for (double x : p) {
        if (x < 0.0 || (strictly_positive && x <= 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument(strictly_positive
                                            ? "sinkhorn: balanced mode requires strictly positive "
                                              "weights (drop zero-weight atoms first)"
                                            : "sinkhorn: weights must be finite and nonnegative");
        }
        ps += x;
    }
    for (double x : q) {
        if (x < 0.0 || (strictly_positive && x <= 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument(strictly_positive
                                            ? "sinkhorn: balanced mode requires strictly positive "
                                              "weights (drop zero-weight atoms first)"
                                            : "sinkhorn: weights must be finite and nonnegative");
        }
        qs += x;
    }
    if (!(ps > 0.0) || !(qs > 0.0)) {
        throw std::invalid_argument("sinkhorn: weights must carry positive total mass");
    }
    if (strictly_positive && std::fabs(ps - qs) > 1e-9 * std::max(1.0, std::max(ps, qs))) {
        throw std::invalid_argument("sinkhorn: balanced mode requires equal total masses");
    }
    for (double x : c.v) {
        if (!std::isfinite(x)) throw std::invalid_argument("sinkhorn: cost matrix must be finite");
    }
}

bool use_log_domain(LogDomainMode mode, double epsilon, const CostMatrix& c) {
    switch (mode) {
        case LogDomainMode::on: return true;
        case LogDomainMode::off: return false;
        case LogDomainMode::automatic: return epsilon < 1e-3 * c.max();
    }
    return true;
}

// log(sum exp(x_j)) over one cost row/column, tolerating -inf entries.
// Max subtraction keeps the exponentials in range; an all--inf input
// yields -inf.
double lse_row(const std::vector<double>& g, const CostMatrix& c, int i, double eps) {
    double mx = -kInf;
    for (int j = 0; j < c.m; ++j) {
        const double t = (g[static_cast<std::size_t>(j)] - c.at(i, j)) / eps;
        if (t > mx) mx = t;
    }
    if (mx == -kInf) return -kInf;
    double s = 0.0;
    for (int j = 0; j < c.m; ++j) {
        const double t = (g[static_cast<std::size_t>(j)] - c.at(i, j)) / eps;
        if (t != -kInf) s += std::exp(t - mx);
    }
    return mx + std::log(s);
}

double lse_col(const std::vector<double>& f, const CostMatrix& c, int j, double eps) {
    double mx = -kInf;
    for (int i = 0; i < c.n; ++i) {
        const double t = (f[static_cast<std::size_t>(i)] - c.at(i, j)) / eps;
        if (t > mx) mx = t;
    }
    if (mx == -kInf) return -kInf;
    double s = 0.0;
    for (int i = 0; i < c.n; ++i) {
        const double t = (f[static_cast<std::size_t>(i)] - c.at(i, j)) / eps;
        if (t != -kInf) s += std::exp(t - mx);
    }
    return mx + std::log(s);
}

// Assemble the dense plan and its diagnostics from log-domain potentials.
void finalize_from_potentials(TransportPlan& plan, const std::vector<double>& f,
                              const std::vector<double>& g, const CostMatrix& c, double eps) {
    plan.n = c.n;
    plan.m = c.m;
    plan.epsilon = eps;
    plan.potential_src = f;
    plan.potential_tgt = g;
    plan.matrix.assign(static_cast<std::size_t>(c.n) * c.m, 0.0);
    plan.src_marginal.assign(static_cast<std::size_t>(c.n), 0.0);
    plan.tgt_marginal.assign(static_cast<std::size_t>(c.m), 0.0);
    plan.total_cost = 0.0;
    plan.mass = 0.0;
    for (int i = 0; i < c.n; ++i) {
        const double fi = f[static_cast<std::size_t>(i)];
        for (int j = 0; j < c.m; ++j) {
            double value = 0.0;
            const double arg = fi + g[static_cast<std::size_t>(j)] - c.at(i, j);
            if (arg != -kInf) value = std::exp(arg / eps);
            plan.matrix[static_cast<std::size_t>(i) * c.m + j] = value;
            plan.src_marginal[static_cast<std::size_t>(i)] += value;
            plan.tgt_marginal[static_cast<std::size_t>(j)] += value;
            plan.total_cost += value * c.at(i, j);
            plan.mass += value;
        }
    }
}

// Balanced solve in log space.  Optionally walks epsilon down a halving
// schedule with warm-started potentials; every stage is a plain Sinkhorn
// solve, so the final stage converges to the target-epsilon fixed point.
TransportPlan sinkhorn_log(const std::vector<double>& p, const std::vector<double>& q,
                           const CostMatrix& c, const SinkhornParams& params) {
    const int n = c.n, m = c.m;
    std::vector<double> logp(static_cast<std::size_t>(n)), logq(static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i) logp[static_cast<std::size_t>(i)] = std::log(p[static_cast<std::size_t>(i)]);
    for (int j = 0; j < m; ++j) logq[static_cast<std::size_t>(j)] = std::log(q[static_cast<std::size_t>(j)]);

    std::vector<double> f(static_cast<std::size_t>(n), 0.0), g(static_cast<std::size_t>(m), 0.0);

    std::vector<double> schedule;
    if (params.anneal) {
        double e0 = c.max() / 2.0;
        while (e0 > params.epsilon * 2.0) {
            schedule.push_back(e0);
            e0 /= 2.0;
        }
    }
    schedule.push_back(params.epsilon);

    TransportPlan plan;
    int iters = 0;
    double residual = kInf;
    bool converged = false;
    for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
        const double eps = schedule[stage];
        const bool final_stage = (stage + 1 == schedule.size());
        // Intermediate stages only prime the potentials; a loose residual
        // target is enough and keeps the schedule cheap.
        const double target = final_stage ? params.tolerance : std::max(params.tolerance, 1e-2);
        while (iters < params.max_iters) {
            ++iters;
            for (int i = 0; i < n; ++i) {
                f[static_cast<std::size_t>(i)] =
                    eps * logp[static_cast<std::size_t>(i)] - eps * lse_row(g, c, i, eps);
            }
            for (int j = 0; j < m; ++j) {
                g[static_cast<std::size_t>(j)] =
                    eps * logq[static_cast<std::size_t>(j)] - eps * lse_col(f, c, j, eps);
            }
            // Column marginals are exact right after the g update; the row
            // deviation is the whole residual.
            residual = 0.0;
            for (int i = 0; i < n; ++i) {
                double row = 0.0;
                const double fi = f[static_cast<std::size_t>(i)];
                for (int j = 0; j < m; ++j) {
                    row += std::exp((fi + g[static_cast<std::size_t>(j)] - c.at(i, j)) / eps);
                }
                residual += std::fabs(row - p[static_cast<std::size_t>(i)]);
            }
            if (residual <= target) break;
        }
        if (final_stage) converged = (residual <= params.tolerance);
    }

    finalize_from_potentials(plan, f, g, c, params.epsilon);
    plan.iterations_used = iters;
    plan.residual = residual;
    plan.converged = converged;
    return plan;
}

// Balanced solve with plain multiplicative updates.  Returns false through
// *broke_down when the kernel underflows, so the caller can fall back to
// the log-domain path.
bool sinkhorn_dense(const std::vector<double>& p, const std::vector<double>& q,
                    const CostMatrix& c, const SinkhornParams& params, TransportPlan* out) {
    const int n = c.n, m = c.m;
    const double eps = params.epsilon;
    std::vector<double> K(static_cast<std::size_t>(n) * m);
    for (std::size_t idx = 0; idx < K.size(); ++idx) K[idx] = std::exp(-c.v[idx] / eps);

    std::vector<double> u(static_cast<std::size_t>(n), 1.0), v(static_cast<std::size_t>(m), 1.0);
    std::vector<double> kv(static_cast<std::size_t>(n)), ktu(static_cast<std::size_t>(m));
    int iters = 0;
    double residual = kInf;
    bool converged = false;
    while (iters < params.max_iters) {
        ++iters;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < m; ++j) s += K[static_cast<std::size_t>(i) * m + j] * v[static_cast<std::size_t>(j)];
            if (!(s > 0.0) || !std::isfinite(s)) return false;
            u[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)] / s;
        }
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += K[static_cast<std::size_t>(i) * m + j] * u[static_cast<std::size_t>(i)];
            if (!(s > 0.0) || !std::isfinite(s)) return false;
            v[static_cast<std::size_t>(j)] = q[static_cast<std::size_t>(j)] / s;
        }
        residual = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < m; ++j) row += K[static_cast<std::size_t>(i) * m + j] * v[static_cast<std::size_t>(j)];
            row *= u[static_cast<std::size_t>(i)];
            residual += std::fabs(row - p[static_cast<std::size_t>(i)]);
        }
        if (!std::isfinite(residual)) return false;
        if (residual <= params.tolerance) {
            converged = true;
            break;
        }
    }

    std::vector<double> f(static_cast<std::size_t>(n)), g(static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = eps * std::log(u[static_cast<std::size_t>(i)]);
    for (int j = 0; j < m; ++j) g[static_cast<std::size_t>(j)] = eps * std::log(v[static_cast<std::size_t>(j)]);
    finalize_from_potentials(*out, f, g, c, eps);
    out->iterations_used = iters;
    out->residual = residual;
    out->converged = converged;
    return true;
}

}  // namespace

TransportPlan sinkhorn(const std::vector<double>& p, const std::vector<double>& q,
                       const CostMatrix& c, const SinkhornParams& params) {
    if (!(params.epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive");
    if (!(params.tolerance > 0.0)) throw std::invalid_argument("sinkhorn: tolerance must be positive");
    if (params.max_iters < 1) throw std::invalid_argument("sinkhorn: max_iters must be positive");
    check_weights(p, q, c, /*strictly_positive=*/true);

    if (use_log_domain(params.log_domain, params.epsilon, c)) {
        return sinkhorn_log(p, q, c, params);
    }
    TransportPlan plan;
    if (sinkhorn_dense(p, q, c, params, &plan)) return plan;
    if (params.log_domain == LogDomainMode::automatic) {
        return sinkhorn_log(p, q, c, params);
    }
    throw NumericalError("sinkhorn: kernel underflow in dense mode; increase epsilon or "
                         "enable the log-domain mode");
}

namespace {

// Unbalanced solve in log space.  exponent_src/tgt are the marginal
// relaxation exponents alpha = l1/(eps+l1), beta = l2/(eps+l2); an exponent
// of exactly 0 pins the corresponding potential at 0 (scaling vector 1).
TransportPlan uot_log(const std::vector<double>& p, const std::vector<double>& q,
                      const CostMatrix& c, const UnbalancedParams& params, double alpha,
                      double beta) {
    const int n = c.n, m = c.m;
    const double eps = params.epsilon;
    std::vector<double> logp(static_cast<std::size_t>(n)), logq(static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i) {
        const double w = p[static_cast<std::size_t>(i)];
        logp[static_cast<std::size_t>(i)] = (w > 0.0) ? std::log(w) : -kInf;
    }
    for (int j = 0; j < m; ++j) {
        const double w = q[static_cast<std::size_t>(j)];
        logq[static_cast<std::size_t>(j)] = (w > 0.0) ? std::log(w) : -kInf;
    }

    std::vector<double> f(static_cast<std::size_t>(n), 0.0), g(static_cast<std::size_t>(m), 0.0);
    std::vector<double> f_prev, g_prev;
    int iters = 0;
    double residual = kInf;
    bool converged = false;
    while (iters < params.max_iters) {
        ++iters;
        f_prev = f;
        g_prev = g;
        if (alpha != 0.0) {
            for (int i = 0; i < n; ++i) {
                const double lp = logp[static_cast<std::size_t>(i)];
                f[static_cast<std::size_t>(i)] =
                    (lp == -kInf) ? -kInf : alpha * (eps * lp - eps * lse_row(g, c, i, eps));
            }
        }
        if (beta != 0.0) {
            for (int j = 0; j < m; ++j) {
                const double lq = logq[static_cast<std::size_t>(j)];
                g[static_cast<std::size_t>(j)] =
                    (lq == -kInf) ? -kInf : beta * (eps * lq - eps * lse_col(f, c, j, eps));
            }
        }
        // Fixed-point displacement of (log u, log v) = (f, g)/eps.
        residual = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = f[static_cast<std::size_t>(i)], b = f_prev[static_cast<std::size_t>(i)];
            if (a == -kInf && b == -kInf) continue;
            residual = std::max(residual, std::fabs(a - b) / eps);
        }
        for (int j = 0; j < m; ++j) {
            const double a = g[static_cast<std::size_t>(j)], b = g_prev[static_cast<std::size_t>(j)];
            if (a == -kInf && b == -kInf) continue;
            residual = std::max(residual, std::fabs(a - b) / eps);
        }
        if (residual <= params.tolerance) {
            converged = true;
            break;
        }
    }

    TransportPlan plan;
    finalize_from_potentials(plan, f, g, c, eps);
    plan.iterations_used = iters;
    plan.residual = residual;
    plan.converged = converged;
    return plan;
}

bool uot_dense(const std::vector<double>& p, const std::vector<double>& q, const CostMatrix& c,
               const UnbalancedParams& params, double alpha, double beta, TransportPlan* out) {
    const int n = c.n, m = c.m;
    const double eps = params.epsilon;
    std::vector<double> K(static_cast<std::size_t>(n) * m);
    for (std::size_t idx = 0; idx < K.size(); ++idx) K[idx] = std::exp(-c.v[idx] / eps);

    std::vector<double> u(static_cast<std::size_t>(n), 1.0), v(static_cast<std::size_t>(m), 1.0);
    std::vector<double> u_prev, v_prev;
    int iters = 0;
    double residual = kInf;
    bool converged = false;
    while (iters < params.max_iters) {
        ++iters;
        u_prev = u;
        v_prev = v;
        if (alpha != 0.0) {
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int j = 0; j < m; ++j) s += K[static_cast<std::size_t>(i) * m + j] * v[static_cast<std::size_t>(j)];
                if (!(s > 0.0) || !std::isfinite(s)) return false;
                u[static_cast<std::size_t>(i)] = std::pow(p[static_cast<std::size_t>(i)] / s, alpha);
                if (!std::isfinite(u[static_cast<std::size_t>(i)])) return false;
            }
        }
        if (beta != 0.0) {
            for (int j = 0; j < m; ++j) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += K[static_cast<std::size_t>(i) * m + j] * u[static_cast<std::size_t>(i)];
                if (!(s > 0.0) || !std::isfinite(s)) return false;
                v[static_cast<std::size_t>(j)] = std::pow(q[static_cast<std::size_t>(j)] / s, beta);
                if (!std::isfinite(v[static_cast<std::size_t>(j)])) return false;
            }
        }
        residual = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = u[static_cast<std::size_t>(i)], b = u_prev[static_cast<std::size_t>(i)];
            if (a == 0.0 && b == 0.0) continue;
            if (!(a > 0.0) || !(b > 0.0)) return false;
            residual = std::max(residual, std::fabs(std::log(a / b)));
        }
        for (int j = 0; j < m; ++j) {
            const double a = v[static_cast<std::size_t>(j)], b = v_prev[static_cast<std::size_t>(j)];
            if (a == 0.0 && b == 0.0) continue;
            if (!(a > 0.0) || !(b > 0.0)) return false;
            residual = std::max(residual, std::fabs(std::log(a / b)));
        }
        if (residual <= params.tolerance) {
            converged = true;
            break;
        }
    }

    std::vector<double> f(static_cast<std::size_t>(n)), g(static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i) {
        const double ui = u[static_cast<std::size_t>(i)];
        f[static_cast<std::size_t>(i)] = (ui > 0.0) ? eps * std::log(ui) : -kInf;
    }
    for (int j = 0; j < m; ++j) {
        const double vj = v[static_cast<std::size_t>(j)];
        g[static_cast<std::size_t>(j)] = (vj > 0.0) ? eps * std::log(vj) : -kInf;
    }
    finalize_from_potentials(*out, f, g, c, eps);
    out->iterations_used = iters;
    out->residual = residual;
    out->converged = converged;
    return true;
}

}  // namespace

TransportPlan unbalanced_sinkhorn(const std::vector<double>& p, const std::vector<double>& q,
                                  const CostMatrix& c, const UnbalancedParams& params) {
    if (!(params.epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive");
    if (!(params.tolerance > 0.0)) throw std::invalid_argument("sinkhorn: tolerance must be positive");
    if (params.max_iters < 1) throw std::invalid_argument("sinkhorn: max_iters must be positive");
    if (params.lambda1 < 0.0 || params.lambda2 < 0.0) {
        throw std::invalid_argument("sinkhorn: lambda penalties must be nonnegative");
    }
    check_weights(p, q, c, /*strictly_positive=*/false);

    const double alpha = params.lambda1 / (params.epsilon + params.lambda1);
    const double beta = params.lambda2 / (params.epsilon + params.lambda2);
    if (use_log_domain(params.log_domain, params.epsilon, c)) {
        return uot_log(p, q, c, params, alpha, beta);
    }
    TransportPlan plan;
    if (uot_dense(p, q, c, params, alpha, beta, &plan)) return plan;
    if (params.log_domain == LogDomainMode::automatic) {
        return uot_log(p, q, c, params, alpha, beta);
    }
    throw NumericalError("sinkhorn: kernel underflow in dense mode; increase epsilon or "
                         "enable the log-domain mode");
}

double dual_objective(const std::vector<double>& phi, const std::vector<double>& psi,
                      const std::vector<double>& p, const std::vector<double>& q) {
    if (phi.size() != p.size() || psi.size() != q.size()) {
        throw std::invalid_argument("dual_objective: potential lengths disagree with the weights");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] != 0.0) s += p[i] * phi[i];
    }
    for (std::size_t j = 0; j < q.size(); ++j) {
        if (q[j] != 0.0) s += q[j] * psi[j];
    }
    return s;
}

int recommend(const TransportPlan& plan, int i, RecommendMode mode, std::uint64_t seed) {
    if (i < 0 || i >= plan.n) throw std::invalid_argument("recommend: source index out of range");
    const std::size_t row = static_cast<std::size_t>(i) * plan.m;
    double row_mass = 0.0;
    for (int j = 0; j < plan.m; ++j) row_mass += plan.matrix[row + j];
    if (!(row_mass > 0.0)) {
        throw NumericalError("recommend: source point " + std::to_string(i) +
                             " unserved (plan row carries no mass)");
    }
    if (mode == RecommendMode::argmax) {
        int best = 0;
        double best_mass = plan.matrix[row];
        for (int j = 1; j < plan.m; ++j) {
            if (plan.matrix[row + j] > best_mass) {
                best_mass = plan.matrix[row + j];
                best = j;
            }
        }
        return best;
    }
    SplitMix64 gen(seed);
    const double u = gen.next_double() * row_mass;
    double cum = 0.0;
    for (int j = 0; j < plan.m; ++j) {
        cum += plan.matrix[row + j];
        if (u < cum) return j;
    }
    return plan.m - 1;  // only reachable through accumulated roundoff
}

}  // namespace ccot
