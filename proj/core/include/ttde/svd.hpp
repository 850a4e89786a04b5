#pragma once

#include <Eigen/Core>

#include "ttde/grid.hpp"

namespace ttde {

// Deterministic truncation/sign conventions shared by every compressor, so
// that SVD-based and Gram/eigendecomposition-based paths produce comparable
// factors core-by-core.
struct SvdConvention {
    Index truncation_rank = 1;
    double rel_singular_floor = 1e-12;
};

struct TruncatedSvd {
    Eigen::MatrixXd U;       // m x r, sign-fixed columns
    Eigen::VectorXd sigma;   // r, descending; entries below the floor are zeroed
    Eigen::MatrixXd V;       // n x r
};

struct SymEig {
    Eigen::MatrixXd U;        // m x r, sign-fixed columns
    Eigen::VectorXd lambda;   // r, descending
};

// Flip each column so its largest-magnitude entry is positive (first index on
// ties). Returns +-1 per column so paired factors can be flipped alongside.
Eigen::VectorXd fix_signs(Eigen::Ref<Eigen::MatrixXd> vectors);

TruncatedSvd truncated_svd(const Eigen::MatrixXd& M, const SvdConvention& conv);

// Top-r eigenpairs of the symmetrized (A + A^T)/2, descending eigenvalues,
// sign-fixed vectors, exact ties broken lexicographically.
SymEig sym_eig_top(const Eigen::MatrixXd& A, Index r);

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix via eigendecomposition,
// dropping eigenvalues below rel_tol * lambda_max.
Eigen::MatrixXd sym_pinv(const Eigen::MatrixXd& W, double rel_tol);

}  // namespace ttde
