#pragma once

#include <Eigen/Core>

#include "ttde/compress.hpp"
#include "ttde/density_model.hpp"
#include "ttde/estimator.hpp"

namespace ttde {

struct PcaModel {
    Eigen::MatrixXd rotation;  // d x d', orthonormal columns
    Eigen::VectorXd center;    // length d
    Eigen::VectorXd eigvals;   // length d', nonincreasing

    Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const {
        return (x.rowwise() - center.transpose()) * rotation;
    }
};

// Exact covariance eigendecomposition by default; the streaming mode runs
// block subspace iteration with the same contract.
PcaModel pca_fit(const SampleSet& s, Index d_prime, bool streaming = false);

struct Kde1d {
    GridSpec grid;
    Eigen::VectorXd density;  // nonnegative, unit mass on the grid
    double bandwidth = 0.0;
};

// Gaussian-kernel KDE at the grid centers with boundary reflection, default
// bandwidth 1.06 * sigma * N^(-1/5), renormalized to unit grid mass.
Kde1d kde1d(const Eigen::VectorXd& samples, const GridSpec& grid, double bandwidth = 0.0);

struct GeneralFitOptions {
    Index n_basis = 17;
    double alpha = 0.01;
    double lambda = 0.0;
    CompressSpec algo;
    Index pca_dim = 0;        // 0 keeps every dimension
    bool use_pca = true;      // false forces the identity map (no centering)
    bool kde_mean_field = true;
    bool streaming_pca = false;
    double mesh = 0.05;       // grid mesh in the model coordinates (PCA path)
    double pad_bandwidths = 3.0;
};

// PCA -> per-dimension KDE mean-field -> orthonormal basis -> fit ->
// deconvolve -> normalize. With use_pca and kde_mean_field both off this is
// the plain pipeline on the sample box.
DensityModel fit_general(const SampleSet& s, const GeneralFitOptions& opt);

}  // namespace ttde
