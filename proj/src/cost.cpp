#include "ccot/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace ccot {

CostKind cost_kind_from_string(const std::string& s) {
    if (s == "squared_euclidean") return CostKind::squared_euclidean;
    if (s == "euclidean") return CostKind::euclidean;
    if (s == "p_power") return CostKind::p_power;
    if (s == "l1") return CostKind::l1;
    throw std::invalid_argument("cost: unknown kind \"" + s + "\"");
}

std::string to_string(CostKind kind) {
    switch (kind) {
        case CostKind::squared_euclidean: return "squared_euclidean";
        case CostKind::euclidean: return "euclidean";
        case CostKind::p_power: return "p_power";
        case CostKind::l1: return "l1";
    }
    return "unknown";
}

double CostMatrix::mean() const {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double CostMatrix::max() const {
    double m = 0.0;
    for (double x : v) {
        if (x > m) m = x;
    }
    return m;
}

CostMatrix build_cost(const std::vector<Vec2>& src, const std::vector<Vec2>& tgt,
                      CostKind kind, double p) {
    if (src.empty() || tgt.empty()) {
        throw std::invalid_argument("build_cost: point sets must be nonempty");
    }
    if (kind == CostKind::p_power && !(p > 1.0)) {
        throw std::invalid_argument("build_cost: p_power requires p > 1 (strict convexity); "
                                    "use euclidean for p = 1");
    }
    CostMatrix c;
    c.n = static_cast<int>(src.size());
    c.m = static_cast<int>(tgt.size());
    c.kind = kind;
    c.p = (kind == CostKind::p_power) ? p : (kind == CostKind::euclidean ? 1.0 : 2.0);
    c.v.resize(static_cast<std::size_t>(c.n) * c.m);
    for (int i = 0; i < c.n; ++i) {
        for (int j = 0; j < c.m; ++j) {
            const double dx = src[static_cast<std::size_t>(i)].x - tgt[static_cast<std::size_t>(j)].x;
            const double dy = src[static_cast<std::size_t>(i)].y - tgt[static_cast<std::size_t>(j)].y;
            double value = 0.0;
            switch (kind) {
                case CostKind::squared_euclidean:
                    value = dx * dx + dy * dy;
                    break;
                case CostKind::euclidean:
                    value = std::sqrt(dx * dx + dy * dy);
                    break;
                case CostKind::p_power:
                    value = std::pow(std::sqrt(dx * dx + dy * dy), p);
                    break;
                case CostKind::l1:
                    value = std::fabs(dx) + std::fabs(dy);
                    break;
            }
            c.at(i, j) = value;
        }
    }
    return c;
}

CostMatrix effective_cost(const CostMatrix& c, double gamma, double budget) {
    if (!(gamma > 0.0) || !(gamma < 1.0)) {
        throw std::invalid_argument("effective_cost: gamma must lie in (0, 1)");
    }
    if (!(budget > 0.0)) {
        throw std::invalid_argument("effective_cost: budget must be positive");
    }
    CostMatrix out = c;
    const double log_gamma = std::log(gamma);
    for (double& x : out.v) {
        x = 1.0 - std::exp((x / budget) * log_gamma);
    }
    return out;
}

}  // namespace ccot
