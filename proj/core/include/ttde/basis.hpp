#pragma once

#include <vector>

#include <Eigen/Core>

#include "ttde/grid.hpp"

namespace ttde {

// Raw Fourier basis value on [-L, L]: 1/sqrt(2L) for l = 1, cosine for even l,
// sine for odd l > 1. Orthonormal with respect to Lebesgue measure.
double fourier_eval(Index l, double x, double L);

// Univariate basis family with the convention phi_1 == 1 and orthonormality
// with respect to the family's reference (mean-field) measure. The Fourier
// family is internally rescaled by sqrt(2L) so that this convention holds with
// the uniform mean-field 1/(2L); the raw Lebesgue-orthonormal values are
// recovered from fourier_eval.
struct BasisFamily {
    enum class Kind { fourier, legendre, tabulated };

    Kind kind = Kind::fourier;
    Index n = 1;
    double half_width = 1.0;     // fourier only
    GridSpec grid;               // tabulated only
    Eigen::MatrixXd values;      // tabulated: n x G at grid centers
    Eigen::VectorXd weight;      // tabulated: reference density at grid centers

    static BasisFamily fourier(Index n, double half_width);
    static BasisFamily legendre(Index n);  // on [0, 1]
    static BasisFamily tabulated(const GridSpec& grid, Eigen::MatrixXd values,
                                 Eigen::VectorXd weight);

    double domain_lo() const;
    double domain_hi() const;

    // Basis value, 1-based index l.
    double eval(Index l, double x) const;
    Eigen::VectorXd eval_all(double x) const;

    // Reference mean-field density at x.
    double measure_density(double x) const;

    // G x n matrix of basis values at the centers of the given grid.
    Eigen::MatrixXd tabulate(const GridSpec& g) const;
};

// Numerical Gram matrix of the family w.r.t. its reference measure, by
// midpoint quadrature on the given grid. Warns on stderr if the grid is too
// coarse for the highest frequency.
Eigen::MatrixXd gram_check(const BasisFamily& b, const GridSpec& quad);

// Per-dimension feature matrix: row i = [1, alpha*phi_2(x_i), ..., alpha*phi_n(x_i)].
struct FeatureBlock {
    Eigen::MatrixXd matrix;  // N x n
    Index dim_index = 0;
    double alpha = 1.0;
};

FeatureBlock feature_block(const Eigen::VectorXd& samples_j, const BasisFamily& b,
                           double alpha, Index dim_index = 0);

// Polynomials orthonormalized against a tabulated weight by modified
// Gram-Schmidt with one reorthogonalization pass; first function is 1.
BasisFamily orthonormalize_wrt(const GridSpec& grid, const Eigen::VectorXd& mu, Index n);

enum class Measure { lebesgue, mean_field };

// m(l) = integral of phi_l against the requested measure on the domain.
Eigen::VectorXd integral_vector(const BasisFamily& b, Measure measure);

}  // namespace ttde
