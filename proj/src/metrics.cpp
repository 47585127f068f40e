#include "ccot/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ccot {

double transport_cost(const TransportPlan& plan, const CostMatrix& C) {
    if (plan.n != C.n || plan.m != C.m) {
        throw std::invalid_argument("transport_cost: plan and cost matrix shapes differ");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < plan.matrix.size(); ++k) total += plan.matrix[k] * C.v[k];
    return total;
}

double extra_cost_percent(double cce_cost, double baseline_cost) {
    if (!(baseline_cost > 0.0)) {
        throw std::invalid_argument("extra_cost_percent: baseline cost must be positive");
    }
    return 100.0 * (cce_cost - baseline_cost) / baseline_cost;
}

double kl_divergence(const std::vector<double>& marginal, const std::vector<double>& q) {
    if (marginal.size() != q.size()) {
        throw std::invalid_argument("kl_divergence: weight vectors differ in length");
    }
    double ms = 0.0, qs = 0.0;
    for (std::size_t i = 0; i < marginal.size(); ++i) {
        if (marginal[i] < 0.0 || q[i] < 0.0) {
            throw std::invalid_argument("kl_divergence: weights must be nonnegative");
        }
        ms += marginal[i];
        qs += q[i];
    }
    if (!(ms > 0.0) || !(qs > 0.0)) {
        throw std::invalid_argument("kl_divergence: both weight vectors need positive mass");
    }
    // Both sides are renormalized so the comparison is between probability
    // vectors even when the marginal lost or gained mass.
    double kl = 0.0;
    for (std::size_t i = 0; i < marginal.size(); ++i) {
        const double m = marginal[i] / ms;
        if (m == 0.0) continue;  // 0 log 0 = 0
        const double qi = q[i] / qs;
        if (qi == 0.0) {
            throw std::invalid_argument(
                "kl_divergence: marginal has mass outside the reference support");
        }
        kl += m * std::log(m / qi);
    }
    return kl;
}

namespace {

DiscreteMeasure positive_support(const DiscreteMeasure& m, const char* who) {
    DiscreteMeasure out;
    double total = 0.0;
    for (std::size_t i = 0; i < m.points.size(); ++i) {
        if (m.weights[i] > 0.0) {
            out.points.push_back(m.points[i]);
            out.weights.push_back(m.weights[i]);
            total += m.weights[i];
        }
    }
    if (out.points.empty() || !(total > 0.0)) {
        throw std::invalid_argument(std::string(who) + ": measure has no positive mass");
    }
    for (double& w : out.weights) w /= total;
    return out;
}

DiscreteMeasure grid_support(const GridDensity& g) {
    DiscreteMeasure out;
    for (int i = 0; i < g.dom.nx; ++i) {
        for (int j = 0; j < g.dom.ny; ++j) {
            const double w = g.at(i, j);
            if (w > 0.0) {
                out.points.push_back(g.dom.center(i, j));
                out.weights.push_back(w);
            }
        }
    }
    return out;
}

}  // namespace

double wasserstein_estimate(const DiscreteMeasure& p, const DiscreteMeasure& q, double power,
                            double epsilon) {
    if (!(power >= 1.0)) {
        throw std::invalid_argument("wasserstein_estimate: order must be at least 1");
    }
    const DiscreteMeasure ps = positive_support(p, "wasserstein_estimate");
    const DiscreteMeasure qs = positive_support(q, "wasserstein_estimate");
    CostMatrix C;
    if (power == 2.0) {
        C = build_cost(ps.points, qs.points, CostKind::squared_euclidean);
    } else if (power == 1.0) {
        C = build_cost(ps.points, qs.points, CostKind::euclidean);
    } else {
        C = build_cost(ps.points, qs.points, CostKind::p_power, power);
    }
    SinkhornParams params;
    params.epsilon = epsilon;
    const TransportPlan plan = sinkhorn(ps.weights, qs.weights, C, params);
    const double cost = std::max(plan.total_cost, 0.0);
    return std::pow(cost, 1.0 / power);
}

double wasserstein_estimate(const GridDensity& p, const GridDensity& q, double power,
                            double epsilon) {
    if (!p.dom.same_grid(q.dom)) {
        throw std::invalid_argument("wasserstein_estimate: grids live on different domains");
    }
    return wasserstein_estimate(grid_support(p), grid_support(q), power, epsilon);
}

}  // namespace ccot
