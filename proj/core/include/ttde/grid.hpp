#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "ttde/errors.hpp"

namespace ttde {

using Index = Eigen::Index;

// Uniform cell grid on [lo, hi]. Quadrature, tabulation and sampling all use
// the cell centers (midpoint rule), so that the evaluation grid, the sampler
// grid and the error metrics share one discretization.
struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    double mesh = 0.1;

    GridSpec() = default;
    GridSpec(double lo_, double hi_, double mesh_) : lo(lo_), hi(hi_), mesh(mesh_) {
        validate();
    }

    void validate() const {
        if (!(hi > lo)) throw config_error("GridSpec: hi must exceed lo");
        if (!(mesh > 0)) throw config_error("GridSpec: mesh must be positive");
        const double cells = (hi - lo) / mesh;
        if (std::abs(cells - std::round(cells)) > 1e-6 * cells)
            throw config_error("GridSpec: (hi-lo) must be an integer multiple of mesh");
    }

    Index points() const { return static_cast<Index>(std::llround((hi - lo) / mesh)); }

    double center(Index k) const { return lo + (static_cast<double>(k) + 0.5) * mesh; }

    Eigen::VectorXd centers() const {
        const Index g = points();
        Eigen::VectorXd c(g);
        for (Index k = 0; k < g; ++k) c[k] = center(k);
        return c;
    }

    bool contains(double x) const { return x >= lo && x <= hi; }

    // Index of the cell containing x; clamped to the valid range at the ends.
    Index cell_of(double x) const {
        Index k = static_cast<Index>(std::floor((x - lo) / mesh));
        if (k < 0) k = 0;
        if (k >= points()) k = points() - 1;
        return k;
    }

    bool operator==(const GridSpec& o) const {
        return lo == o.lo && hi == o.hi && mesh == o.mesh;
    }
};

// Linear interpolation of values tabulated at cell centers, constant
// extrapolation within the half-cell margins at the ends.
inline double interp_at_centers(const GridSpec& g, const Eigen::VectorXd& values, double x) {
    const Index n = g.points();
    const double t = (x - g.lo) / g.mesh - 0.5;
    if (t <= 0.0) return values[0];
    if (t >= static_cast<double>(n - 1)) return values[n - 1];
    const Index k = static_cast<Index>(std::floor(t));
    const double w = t - static_cast<double>(k);
    return (1.0 - w) * values[k] + w * values[k + 1];
}

}  // namespace ttde
