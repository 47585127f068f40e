#pragma once

#include <vector>

#include "ccot/measures.hpp"

struct fftw_plan_s;

namespace ccot {

struct BfmParams {
    double sigma0 = 1.0;   // initial gradient-ascent step
    int max_iters = 2000;  // full back-and-forth iterations
    double tol = 0.01;     // L1 pushforward residual |T_*P - Q|_1
};

struct PotentialPair {
    Grid phi;  // potential on the target side
    Grid psi;  // potential on the source side
    // Dual objective after each accepted ascent step (J and I alternate);
    // nondecreasing by construction of the acceptance rule.
    std::vector<double> dual_history;
};

// Transport map sampled at cell centers: (x(c), y(c)) = T(center of c),
// always inside the closed domain rectangle.
struct GridMap {
    Grid x, y;
};

struct BfmResult {
    PotentialPair potentials;
    GridMap map;             // T = id - grad(phi^c) from the final phi
    GridDensity pushforward; // T_*P by bilinear splatting
    double dual_value = 0.0;
    double primal_halfsq_cost = 0.0;  // sum_c P(c) * |T(c) - c|^2 / 2
    double residual_l1 = 0.0;         // |T_*P - Q|_1 at termination
    double sigma_final = 0.0;
    int iterations_used = 0;
    bool converged = false;
};

// Zero-Neumann spectral Poisson solver on a fixed grid: solve(r) returns
// the zero-mean g with -Laplacian(g) = r - mean(r), where the Laplacian is
// the 5-point stencil with mirrored boundary cells.  Uses a cosine basis;
// plans are built once per instance and reused across solves.
class PoissonSolver {
public:
    explicit PoissonSolver(const Domain& dom);
    ~PoissonSolver();
    PoissonSolver(const PoissonSolver&) = delete;
    PoissonSolver& operator=(const PoissonSolver&) = delete;

    Grid solve(const Grid& residual);

private:
    Domain dom_;
    std::vector<double> buf_;
    std::vector<double> inv_eig_;
    fftw_plan_s* fwd_ = nullptr;
    fftw_plan_s* inv_ = nullptr;
};

// One-shot convenience wrapper around PoissonSolver.
Grid poisson_solve(const Grid& residual);

// Quadratic-cost conjugate (phi^c)(y) = min over grid x of
// { |x - y|^2 / 2 - phi(x) }, evaluated for every grid y via separable
// one-dimensional lower-envelope passes.  Exact: equal to the brute-force
// double loop on the grid (same expression tree, same minima).
Grid ctransform_quadratic(const Grid& phi);

// T(x) = x - grad(phi^c)(x) for the half-squared-distance cost, gradients
// by central differences (one-sided at the boundary), image clamped to the
// closed domain box.
GridMap pushforward_map(const Grid& phi);

// T_*P: each cell's mass splatted bilinearly at its mapped point.  Total
// mass is conserved exactly (the four splat weights always sum to 1).
GridDensity push_density(const GridDensity& p, const GridMap& map);

// Bilinear interpolation of the map channels at x; serves instances off the
// cell centers without re-solving.  Throws when x is outside the domain.
Vec2 evaluate_map(const GridMap& map, const Vec2& x);

// Back-and-forth dual ascent between probability grids on one domain:
// alternating H^(-1) gradient steps on the two dual functionals
// J(phi) = <phi, Q> + <phi^c, P> and I(psi) = <psi, P> + <psi^c, Q>, each
// followed by a conjugating sync of the partner potential.  A step is
// accepted only if its functional does not decrease; otherwise sigma is
// halved and the step retried (three consecutive accepts grow sigma by
// 1.2x, collapse below 1e-12 is an error).  Stops once |T_*P - Q|_1 <= tol
// or max_iters is spent.
BfmResult back_and_forth(const GridDensity& p, const GridDensity& q, const BfmParams& params);

}  // namespace ccot
