#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace ccot {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Bounded rectangular feature space carrying a regular nx-by-ny cell grid.
// Every gridded quantity (mass, score, potential, map channel) is sampled at
// cell centers (x_min + (ix+0.5)*dx, y_min + (iy+0.5)*dy); the linear index
// of cell (ix, iy) is ix*ny + iy.
struct Domain {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    int nx = 2, ny = 2;

    double dx() const { return (x_max - x_min) / nx; }
    double dy() const { return (y_max - y_min) / ny; }
    double cell_area() const { return dx() * dy(); }
    int cells() const { return nx * ny; }

    Vec2 center(int ix, int iy) const {
        return {x_min + (ix + 0.5) * dx(), y_min + (iy + 0.5) * dy()};
    }
    bool contains(const Vec2& p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
    bool same_grid(const Domain& o) const {
        return x_min == o.x_min && x_max == o.x_max && y_min == o.y_min &&
               y_max == o.y_max && nx == o.nx && ny == o.ny;
    }

    // Throws std::invalid_argument when the box is inverted or the
    // resolution is below 2 cells per axis.
    void validate() const;
};

// Scalar field over the cells of a Domain.  Used for cell masses, scores,
// dual potentials, and transport-map coordinate channels alike.
struct Grid {
    Domain dom;
    std::vector<double> v;

    Grid() = default;
    explicit Grid(const Domain& d, double fill = 0.0)
        : dom(d), v(static_cast<std::size_t>(d.cells()), fill) {}

    double& at(int ix, int iy) { return v[static_cast<std::size_t>(ix) * dom.ny + iy]; }
    double at(int ix, int iy) const { return v[static_cast<std::size_t>(ix) * dom.ny + iy]; }

    double sum() const;
    double max_abs() const;
};

// A Grid whose values are nonnegative cell masses (not density values).
// A probability GridDensity sums to 1 within 1e-9.
using GridDensity = Grid;

// Boolean cell selection over a Domain, in the same layout as Grid.
struct Mask {
    Domain dom;
    std::vector<std::uint8_t> v;

    Mask() = default;
    explicit Mask(const Domain& d, bool fill = false)
        : dom(d), v(static_cast<std::size_t>(d.cells()), fill ? 1 : 0) {}

    bool at(int ix, int iy) const { return v[static_cast<std::size_t>(ix) * dom.ny + iy] != 0; }
    void set(int ix, int iy, bool b) { v[static_cast<std::size_t>(ix) * dom.ny + iy] = b ? 1 : 0; }
    int count() const;
};

struct GaussianComponent {
    Vec2 mean;
    Vec2 var;  // diagonal covariance entries (variances), both > 0
    double weight = 1.0;
};

struct GaussianMixture {
    std::vector<GaussianComponent> components;

    // Throws std::invalid_argument unless all variances are positive and the
    // weights sum to 1 within 1e-12.
    void validate() const;
};

// Weighted point cloud.  A probability DiscreteMeasure sums to 1 within 1e-9.
struct DiscreteMeasure {
    std::vector<Vec2> points;
    std::vector<double> weights;

    double total_mass() const;
};

// Mixture density at a point: sum_k w_k * N(p; mean_k, diag(var_k)).
double gmm_pdf(const GaussianMixture& gmm, const Vec2& p);

// Cell mass = pdf(cell center) * cell area, renormalized to total mass 1.
// The renormalization factor (1 / pre-normalization total) is reported
// through renorm_factor when non-null.  Throws NumericalError when the pdf
// underflows to zero on every cell.
GridDensity discretize(const GaussianMixture& gmm, const Domain& dom,
                       double* renorm_factor = nullptr);

// n independent mixture draws with equal weights 1/n.  Pure function of
// (gmm, n, seed): one seed gives one point set, bit-exactly.
DiscreteMeasure sample(const GaussianMixture& gmm, int n, std::uint64_t seed);

// Same draws plus the index of the mixture component behind each point.
struct SampleDraw {
    DiscreteMeasure measure;
    std::vector<int> component;
};
SampleDraw sample_with_components(const GaussianMixture& gmm, int n, std::uint64_t seed);

// Rejection sampler: redraws until `keep` accepts, n times.  Throws
// NumericalError once max_draws raw draws were spent, which signals a
// predicate with (near-)zero acceptance mass.
DiscreteMeasure sample_where(const GaussianMixture& gmm, int n, std::uint64_t seed,
                             const std::function<bool(const Vec2&)>& keep,
                             std::uint64_t max_draws = 50000000);

// Truncated measure: mass restricted to the mask and renormalized by the
// masked total, out(B) = in(mask and B) / in(mask).  When the surviving
// total is already 1 within 1e-12 the division is skipped, which makes
// repeated truncation by the same mask bit-exact.  Throws NumericalError
// when the mask carries (near-)zero mass.
GridDensity truncate(const GridDensity& m, const Mask& mask);

// Point-cloud analogue of truncate: keep points passing the predicate and
// renormalize the surviving weights.  Throws NumericalError when nothing
// survives.
DiscreteMeasure restrict_points(const DiscreteMeasure& m,
                                const std::function<bool(const Vec2&)>& keep);

}  // namespace ccot
