#include "ccot/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ccot/errors.hpp"
#include "ccot/rng.hpp"

namespace ccot {

AssignmentResult assignment_oracle(const CostMatrix& c) {
    if (c.n != c.m) throw std::invalid_argument("assignment_oracle: cost matrix must be square");
    if (c.n > 8) throw std::invalid_argument("assignment_oracle: oracle scale exceeded (n > 8)");
    if (c.n < 1) throw std::invalid_argument("assignment_oracle: empty instance");

    std::vector<int> perm(static_cast<std::size_t>(c.n));
    std::iota(perm.begin(), perm.end(), 0);
    AssignmentResult best;
    best.cost = std::numeric_limits<double>::infinity();
    // next_permutation enumerates in lexicographic order and the strict
    // comparison keeps the first optimum, so ties resolve lexicographically.
    do {
        double total = 0.0;
        for (int i = 0; i < c.n; ++i) total += c.at(i, perm[static_cast<std::size_t>(i)]);
        const double mean_cost = total / c.n;
        if (mean_cost < best.cost) {
            best.cost = mean_cost;
            best.perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

HungarianResult hungarian_assignment(const CostMatrix& c) {
    if (c.n != c.m) throw std::invalid_argument("hungarian_assignment: cost matrix must be square");
    if (c.n < 1) throw std::invalid_argument("hungarian_assignment: empty instance");
    const int n = c.n;
    const double inf = std::numeric_limits<double>::infinity();

    // Shortest augmenting path with potentials, 1-based with a dummy
    // column 0.  Invariant: u[i] + v[j] <= c[i-1, j-1] throughout, with
    // equality along matched edges.
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // column -> row
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = match[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = c.at(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    HungarianResult out;
    out.perm.assign(static_cast<std::size_t>(n), -1);
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        out.perm[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
        total += c.at(match[static_cast<std::size_t>(j)] - 1, j - 1);
    }
    out.cost = total / n;
    out.u.assign(u.begin() + 1, u.end());
    out.v.assign(v.begin() + 1, v.end());
    return out;
}

namespace {

// Value of the dual objective for strictly feasible (phi, psi).
double dual_value(const std::vector<double>& p, const std::vector<double>& q,
                  const std::vector<double>& phi, const std::vector<double>& psi) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * phi[i];
    for (std::size_t j = 0; j < q.size(); ++j) s += q[j] * psi[j];
    return s;
}

}  // namespace

double tiny_lp_bound(const std::vector<double>& p, const std::vector<double>& q,
                     const CostMatrix& c) {
    const int n = c.n;
    const int m = c.m;
    if (static_cast<int>(p.size()) != n || static_cast<int>(q.size()) != m) {
        throw std::invalid_argument("tiny_lp_bound: weight lengths disagree with the cost matrix");
    }

    // Uniform equal-size case: the Hungarian duals are feasible and their
    // value equals the assignment optimum, which is the exact OT optimum.
    bool uniform = (n == m);
    for (int i = 0; uniform && i < n; ++i) uniform = (p[static_cast<std::size_t>(i)] == p[0]);
    for (int j = 0; uniform && j < m; ++j) uniform = (q[static_cast<std::size_t>(j)] == p[0]);
    if (uniform && n >= 1) {
        const HungarianResult h = hungarian_assignment(c);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += h.u[static_cast<std::size_t>(i)] + h.v[static_cast<std::size_t>(i)];
        return p[0] * s;
    }

    // General weights: coordinate ascent over c-feasible potentials.  Each
    // half-update is a c-transform, so the pair stays feasible after every
    // full sweep and every evaluated value is a true lower bound.
    double best = 0.0;  // phi = psi = 0 is feasible for nonnegative costs
    std::vector<double> phi(static_cast<std::size_t>(n));
    std::vector<double> psi(static_cast<std::size_t>(m));
    const double scale = c.mean();
    SplitMix64 gen(0x9D2C5680u);
    for (int restart = 0; restart < 5; ++restart) {
        for (double& x : phi) x = (restart == 0) ? 0.0 : -gen.next_double() * scale;
        for (int sweep = 0; sweep < 30; ++sweep) {
            for (int j = 0; j < m; ++j) {
                double mn = std::numeric_limits<double>::infinity();
                for (int i = 0; i < n; ++i) mn = std::min(mn, c.at(i, j) - phi[static_cast<std::size_t>(i)]);
                psi[static_cast<std::size_t>(j)] = mn;
            }
            for (int i = 0; i < n; ++i) {
                double mn = std::numeric_limits<double>::infinity();
                for (int j = 0; j < m; ++j) mn = std::min(mn, c.at(i, j) - psi[static_cast<std::size_t>(j)]);
                phi[static_cast<std::size_t>(i)] = mn;
            }
            best = std::max(best, dual_value(p, q, phi, psi));
        }
    }
    return best;
}

}  // namespace ccot
