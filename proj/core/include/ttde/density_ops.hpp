#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ttde/density_model.hpp"
#include "ttde/estimator.hpp"

namespace ttde {

// Chain factor A_j(x) = sum_l phi_l(x) G_j(:,l,:), shape r_{j-1} x r_j.
Eigen::MatrixXd chain_factor(const DensityModel& m, Index j, double x);

// Per-dimension tabulation of the chain factors and mean-field at the grid
// centers of the model box; shared by normalization, moments, sampling and
// the L2 metric so that they all see one discretization.
struct GridChain {
    std::vector<std::vector<Eigen::MatrixXd>> factors;  // [dim][cell]
    std::vector<Eigen::VectorXd> mu;                    // mean-field at centers
};

GridChain tabulate_chain(const DensityModel& m);

// Raw density value (may be negative; clipping is the sampler's job).
double eval_point(const DensityModel& m, const Eigen::VectorXd& x);

// Grid quadrature of the model over its box, including 1/Z.
double grid_integral(const DensityModel& m);

// Sets Z so the grid integral over the box equals 1.
DensityModel normalize(DensityModel m);

// Marginal over the first k model dimensions: trailing cores contracted with
// the mean-field integral of each basis. Any PCA map is dropped (the result
// lives in model coordinates).
DensityModel marginal(const DensityModel& m, Index k);

struct SampleDiagnostics {
    double clipped_mass_total = 0.0;  // accumulated negative/positive mass ratios
    Index aborted = 0;                // samples dropped on nonpositive conditional mass
};

// Autoregressive inverse-CDF sampling on the grid: sweep dimensions, clip the
// tabulated conditional at zero, draw a cell, jitter uniformly within it.
// Per-sample RNG streams derived from (seed, sample_id).
SampleSet conditional_sample(const DensityModel& m, Index count, std::uint64_t seed,
                             SampleDiagnostics* diagnostics = nullptr);

// Second moment E[x x^T]: grid quadrature through the TT (model) or the
// count-normalized Gram (samples).
Eigen::MatrixXd moment2(const DensityModel& m);
Eigen::MatrixXd moment2(const SampleSet& s);

// First moment E[x], same quadrature.
Eigen::VectorXd moment1(const DensityModel& m);

}  // namespace ttde
