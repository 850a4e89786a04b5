#include "ttde/basis.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "ttde/errors.hpp"

namespace ttde {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Normalized shifted Legendre value sqrt(2l-1) * P_{l-1}(2x-1) on [0,1].
double legendre_value(Index l, double x) {
    const double t = 2.0 * x - 1.0;
    double pkm1 = 1.0, pk = t;
    if (l == 1) return 1.0;
    for (Index k = 1; k + 1 < l; ++k) {
        const double pkp1 = ((2.0 * k + 1.0) * t * pk - k * pkm1) / (k + 1.0);
        pkm1 = pk;
        pk = pkp1;
    }
    return std::sqrt(2.0 * static_cast<double>(l) - 1.0) * pk;
}

}  // namespace

double fourier_eval(Index l, double x, double L) {
    if (l < 1) throw config_error("fourier_eval: l must be >= 1");
    if (l == 1) return 1.0 / std::sqrt(2.0 * L);
    const double s = 1.0 / std::sqrt(L);
    if (l % 2 == 0) return s * std::cos(static_cast<double>(l) * kPi * x / (2.0 * L));
    // Odd l > 1 pairs the sine of frequency (l-1)pi/(2L) with the cosine at
    // l-1, completing the trigonometric system on [-L, L].
    return s * std::sin(static_cast<double>(l - 1) * kPi * x / (2.0 * L));
}

BasisFamily BasisFamily::fourier(Index n, double half_width) {
    if (n < 1) throw config_error("BasisFamily::fourier: n must be >= 1");
    if (!(half_width > 0)) throw config_error("BasisFamily::fourier: half_width must be positive");
    BasisFamily b;
    b.kind = Kind::fourier;
    b.n = n;
    b.half_width = half_width;
    return b;
}

BasisFamily BasisFamily::legendre(Index n) {
    if (n < 1) throw config_error("BasisFamily::legendre: n must be >= 1");
    BasisFamily b;
    b.kind = Kind::legendre;
    b.n = n;
    return b;
}

BasisFamily BasisFamily::tabulated(const GridSpec& grid, Eigen::MatrixXd values,
                                   Eigen::VectorXd weight) {
    grid.validate();
    if (values.cols() != grid.points() || weight.size() != grid.points())
        throw config_error("BasisFamily::tabulated: table sizes do not match grid");
    BasisFamily b;
    b.kind = Kind::tabulated;
    b.n = values.rows();
    b.grid = grid;
    b.values = std::move(values);
    b.weight = std::move(weight);
    return b;
}

double BasisFamily::domain_lo() const {
    switch (kind) {
        case Kind::fourier: return -half_width;
        case Kind::legendre: return 0.0;
        case Kind::tabulated: return grid.lo;
    }
    return 0.0;
}

double BasisFamily::domain_hi() const {
    switch (kind) {
        case Kind::fourier: return half_width;
        case Kind::legendre: return 1.0;
        case Kind::tabulated: return grid.hi;
    }
    return 1.0;
}

double BasisFamily::eval(Index l, double x) const {
    if (l < 1 || l > n) throw config_error("BasisFamily::eval: index out of range");
    switch (kind) {
        case Kind::fourier:
            // sqrt(2L)-rescaled so the constant is exactly 1.
            return std::sqrt(2.0 * half_width) * fourier_eval(l, x, half_width);
        case Kind::legendre:
            return legendre_value(l, x);
        case Kind::tabulated:
            return interp_at_centers(grid, values.row(l - 1).transpose(), x);
    }
    return 0.0;
}

Eigen::VectorXd BasisFamily::eval_all(double x) const {
    Eigen::VectorXd v(n);
    for (Index l = 1; l <= n; ++l) v[l - 1] = eval(l, x);
    return v;
}

double BasisFamily::measure_density(double x) const {
    switch (kind) {
        case Kind::fourier: return 1.0 / (2.0 * half_width);
        case Kind::legendre: return 1.0;
        case Kind::tabulated: return interp_at_centers(grid, weight, x);
    }
    return 0.0;
}

Eigen::MatrixXd BasisFamily::tabulate(const GridSpec& g) const {
    const Index G = g.points();
    Eigen::MatrixXd t(G, n);
    for (Index k = 0; k < G; ++k) t.row(k) = eval_all(g.center(k)).transpose();
    return t;
}

Eigen::MatrixXd gram_check(const BasisFamily& b, const GridSpec& quad) {
    if (b.kind == BasisFamily::Kind::fourier) {
        // Shortest period of the family is about 4L/n.
        const double period = 4.0 * b.half_width / static_cast<double>(std::max<Index>(b.n, 1));
        if (quad.mesh > period / 4.0)
            std::cerr << "gram_check: quadrature grid does not resolve the highest frequency\n";
    }
    const Index G = quad.points();
    const Eigen::MatrixXd tab = b.tabulate(quad);
    Eigen::VectorXd w(G);
    for (Index k = 0; k < G; ++k) w[k] = b.measure_density(quad.center(k)) * quad.mesh;
    return tab.transpose() * w.asDiagonal() * tab;
}

FeatureBlock feature_block(const Eigen::VectorXd& samples_j, const BasisFamily& b,
                           double alpha, Index dim_index) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw config_error("feature_block: alpha must lie in (0, 1]");
    const double lo = b.domain_lo(), hi = b.domain_hi();
    Index offenders = 0;
    for (Index i = 0; i < samples_j.size(); ++i)
        if (samples_j[i] < lo || samples_j[i] > hi) ++offenders;
    if (offenders > 0)
        throw config_error("feature_block: " + std::to_string(offenders) +
                           " samples outside [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");

    FeatureBlock f;
    f.dim_index = dim_index;
    f.alpha = alpha;
    f.matrix.resize(samples_j.size(), b.n);
    for (Index i = 0; i < samples_j.size(); ++i) {
        f.matrix(i, 0) = 1.0;
        for (Index l = 2; l <= b.n; ++l) f.matrix(i, l - 1) = alpha * b.eval(l, samples_j[i]);
    }
    return f;
}

BasisFamily orthonormalize_wrt(const GridSpec& grid, const Eigen::VectorXd& mu, Index n) {
    grid.validate();
    const Index G = grid.points();
    if (mu.size() != G) throw config_error("orthonormalize_wrt: weight size does not match grid");
    if (mu.minCoeff() < 0) throw config_error("orthonormalize_wrt: negative weight");
    const double mass = mu.sum() * grid.mesh;
    if (std::abs(mass - 1.0) > 1e-6)
        throw config_error("orthonormalize_wrt: weight does not integrate to 1");

    Index support = 0;
    const double wmax = mu.maxCoeff();
    for (Index k = 0; k < G; ++k)
        if (mu[k] > 1e-14 * wmax) ++support;
    if (support < n)
        throw config_error("orthonormalize_wrt: weight support has fewer than n grid cells");

    // Monomials in the centered, scaled grid coordinate for conditioning.
    const double mid = 0.5 * (grid.lo + grid.hi);
    const double half = 0.5 * (grid.hi - grid.lo);
    Eigen::MatrixXd raw(n, G);
    for (Index k = 0; k < G; ++k) {
        const double t = (grid.center(k) - mid) / half;
        double p = 1.0;
        for (Index l = 0; l < n; ++l) {
            raw(l, k) = p;
            p *= t;
        }
    }

    const Eigen::VectorXd w = mu * grid.mesh;
    auto dot = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
        return f.cwiseProduct(g).dot(w);
    };

    Eigen::MatrixXd V(n, G);
    for (Index l = 0; l < n; ++l) {
        Eigen::VectorXd v = raw.row(l).transpose();
        for (int pass = 0; pass < 2; ++pass)
            for (Index m = 0; m < l; ++m)
                v -= dot(V.row(m).transpose(), v) * V.row(m).transpose();
        const double norm2 = dot(v, v);
        if (norm2 < 1e-24)
            throw numeric_error("orthonormalize_wrt: weight is rank deficient at degree " +
                                std::to_string(l));
        V.row(l) = (v / std::sqrt(norm2)).transpose();
    }
    // Constant function comes out as exactly 1 since the weight has unit mass;
    // pin it to kill rounding.
    V.row(0).setOnes();

    return BasisFamily::tabulated(grid, std::move(V), mu);
}

Eigen::VectorXd integral_vector(const BasisFamily& b, Measure measure) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(b.n);
    switch (b.kind) {
        case BasisFamily::Kind::fourier:
            // Non-constant modes integrate to zero exactly over [-L, L].
            m[0] = measure == Measure::mean_field ? 1.0 : 2.0 * b.half_width;
            return m;
        case BasisFamily::Kind::legendre:
            m[0] = 1.0;
            return m;
        case BasisFamily::Kind::tabulated: {
            if (measure == Measure::mean_field)
                return b.values * (b.weight * b.grid.mesh);
            return b.values.rowwise().sum() * b.grid.mesh;
        }
    }
    return m;
}

}  // namespace ttde
