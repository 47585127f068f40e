#include "ccot/measures.hpp"

#include <cmath>
#include <stdexcept>

#include "ccot/errors.hpp"
#include "ccot/rng.hpp"

namespace ccot {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void Domain::validate() const {
    if (!(x_min < x_max) || !(y_min < y_max)) {
        throw std::invalid_argument("domain: box must satisfy x_min < x_max and y_min < y_max");
    }
    if (nx < 2 || ny < 2) {
        throw std::invalid_argument("domain: grid resolution must be at least 2 per axis");
    }
}

double Grid::sum() const {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

double Grid::max_abs() const {
    double m = 0.0;
    for (double x : v) {
        const double a = std::fabs(x);
        if (a > m) m = a;
    }
    return m;
}

int Mask::count() const {
    int c = 0;
    for (std::uint8_t b : v) c += (b != 0);
    return c;
}

void GaussianMixture::validate() const {
    if (components.empty()) {
        throw std::invalid_argument("mixture: needs at least one component");
    }
    double wsum = 0.0;
    for (const auto& c : components) {
        if (!(c.var.x > 0.0) || !(c.var.y > 0.0)) {
            throw std::invalid_argument("mixture: covariance diagonal entries must be positive");
        }
        if (!(c.weight > 0.0)) {
            throw std::invalid_argument("mixture: component weights must be positive");
        }
        wsum += c.weight;
    }
    if (std::fabs(wsum - 1.0) > 1e-12) {
        throw std::invalid_argument("mixture: component weights must sum to 1 within 1e-12");
    }
}

double DiscreteMeasure::total_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double gmm_pdf(const GaussianMixture& gmm, const Vec2& p) {
    double acc = 0.0;
    for (const auto& c : gmm.components) {
        const double zx = p.x - c.mean.x;
        const double zy = p.y - c.mean.y;
        const double expo = -(zx * zx / (2.0 * c.var.x) + zy * zy / (2.0 * c.var.y));
        const double norm = kTwoPi * std::sqrt(c.var.x * c.var.y);
        acc += c.weight * std::exp(expo) / norm;
    }
    return acc;
}

GridDensity discretize(const GaussianMixture& gmm, const Domain& dom, double* renorm_factor) {
    gmm.validate();
    dom.validate();
    GridDensity out(dom);
    const double area = dom.cell_area();
    double total = 0.0;
    for (int ix = 0; ix < dom.nx; ++ix) {
        for (int iy = 0; iy < dom.ny; ++iy) {
            const double m = gmm_pdf(gmm, dom.center(ix, iy)) * area;
            out.at(ix, iy) = m;
            total += m;
        }
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericalError("discretize: degenerate discretization (density underflows on the whole grid)");
    }
    for (double& m : out.v) m /= total;
    if (renorm_factor != nullptr) *renorm_factor = 1.0 / total;
    return out;
}

namespace {

// One mixture draw: pick a component by its weight, then add diagonal
// Gaussian noise around its mean.  Uses exactly one uniform plus one
// normal pair per accepted point, so streams are easy to reason about.
Vec2 draw_point(const GaussianMixture& gmm, Rng& rng, int* component) {
    const double u = rng.uniform();
    double cum = 0.0;
    int k = static_cast<int>(gmm.components.size()) - 1;
    for (std::size_t c = 0; c < gmm.components.size(); ++c) {
        cum += gmm.components[c].weight;
        if (u < cum) {
            k = static_cast<int>(c);
            break;
        }
    }
    const auto& comp = gmm.components[static_cast<std::size_t>(k)];
    const double gx = rng.normal();
    const double gy = rng.normal();
    if (component != nullptr) *component = k;
    return {comp.mean.x + std::sqrt(comp.var.x) * gx, comp.mean.y + std::sqrt(comp.var.y) * gy};
}

}  // namespace

SampleDraw sample_with_components(const GaussianMixture& gmm, int n, std::uint64_t seed) {
    gmm.validate();
    if (n < 1) throw std::invalid_argument("sample: n must be at least 1");
    SampleDraw out;
    out.measure.points.reserve(static_cast<std::size_t>(n));
    out.measure.weights.assign(static_cast<std::size_t>(n), 1.0 / n);
    out.component.reserve(static_cast<std::size_t>(n));
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        int k = 0;
        out.measure.points.push_back(draw_point(gmm, rng, &k));
        out.component.push_back(k);
    }
    return out;
}

DiscreteMeasure sample(const GaussianMixture& gmm, int n, std::uint64_t seed) {
    return sample_with_components(gmm, n, seed).measure;
}

DiscreteMeasure sample_where(const GaussianMixture& gmm, int n, std::uint64_t seed,
                             const std::function<bool(const Vec2&)>& keep,
                             std::uint64_t max_draws) {
    gmm.validate();
    if (n < 1) throw std::invalid_argument("sample_where: n must be at least 1");
    DiscreteMeasure out;
    out.points.reserve(static_cast<std::size_t>(n));
    out.weights.assign(static_cast<std::size_t>(n), 1.0 / n);
    Rng rng(seed);
    std::uint64_t draws = 0;
    while (out.points.size() < static_cast<std::size_t>(n)) {
        if (draws >= max_draws) {
            throw NumericalError("sample_where: rejection sampling exhausted its draw budget; "
                                 "the predicate accepts (near-)zero probability mass");
        }
        const Vec2 p = draw_point(gmm, rng, nullptr);
        ++draws;
        if (keep(p)) out.points.push_back(p);
    }
    return out;
}

GridDensity truncate(const GridDensity& m, const Mask& mask) {
    if (!m.dom.same_grid(mask.dom)) {
        throw std::invalid_argument("truncate: mask and grid live on different domains");
    }
    GridDensity out(m.dom);
    double surviving = 0.0;
    for (std::size_t i = 0; i < m.v.size(); ++i) {
        if (mask.v[i] != 0) {
            out.v[i] = m.v[i];
            surviving += m.v[i];
        }
    }
    if (surviving < 1e-12) {
        throw NumericalError("truncate: truncation over null set (masked mass below 1e-12)");
    }
    // Skipping the division at unit mass keeps truncation by the same mask
    // idempotent at the bit level.
    if (std::fabs(surviving - 1.0) > 1e-12) {
        for (double& x : out.v) x /= surviving;
    }
    return out;
}

DiscreteMeasure restrict_points(const DiscreteMeasure& m,
                                const std::function<bool(const Vec2&)>& keep) {
    if (m.points.size() != m.weights.size()) {
        throw std::invalid_argument("restrict_points: points and weights disagree in length");
    }
    DiscreteMeasure out;
    double surviving = 0.0;
    for (std::size_t i = 0; i < m.points.size(); ++i) {
        if (keep(m.points[i])) {
            out.points.push_back(m.points[i]);
            out.weights.push_back(m.weights[i]);
            surviving += m.weights[i];
        }
    }
    if (out.points.empty() || surviving < 1e-12) {
        throw NumericalError("restrict_points: empty selection (no surviving mass)");
    }
    if (std::fabs(surviving - 1.0) > 1e-12) {
        for (double& w : out.weights) w /= surviving;
    }
    return out;
}

}  // namespace ccot
