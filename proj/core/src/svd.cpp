#include "ttde/svd.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "ttde/errors.hpp"

namespace ttde {

Eigen::VectorXd fix_signs(Eigen::Ref<Eigen::MatrixXd> vectors) {
    Eigen::VectorXd signs(vectors.cols());
    for (Index c = 0; c < vectors.cols(); ++c) {
        Index imax = 0;
        double amax = -1.0;
        for (Index i = 0; i < vectors.rows(); ++i) {
            const double a = std::abs(vectors(i, c));
            if (a > amax) {
                amax = a;
                imax = i;
            }
        }
        const double s = vectors(imax, c) < 0.0 ? -1.0 : 1.0;
        signs[c] = s;
        if (s < 0.0) vectors.col(c) = -vectors.col(c);
    }
    return signs;
}

TruncatedSvd truncated_svd(const Eigen::MatrixXd& M, const SvdConvention& conv) {
    if (!M.allFinite()) throw numeric_error("truncated_svd: non-finite input");
    const Index r = conv.truncation_rank;
    if (r < 1 || r > std::min(M.rows(), M.cols()))
        throw config_error("truncated_svd: truncation_rank exceeds matrix dimensions");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    TruncatedSvd out;
    out.U = svd.matrixU().leftCols(r);
    out.V = svd.matrixV().leftCols(r);
    out.sigma = svd.singularValues().head(r);

    const Eigen::VectorXd signs = fix_signs(out.U);
    for (Index c = 0; c < r; ++c) out.V.col(c) *= signs[c];

    const double floor = conv.rel_singular_floor * svd.singularValues()[0];
    for (Index c = 0; c < r; ++c)
        if (out.sigma[c] < floor) out.sigma[c] = 0.0;
    return out;
}

namespace {

// Lexicographic order on sign-fixed eigenvectors, used only to break exact
// eigenvalue ties deterministically.
bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

}  // namespace

SymEig sym_eig_top(const Eigen::MatrixXd& A, Index r) {
    if (!A.allFinite()) throw numeric_error("sym_eig_top: non-finite input");
    if (r < 1 || r > A.rows()) throw config_error("sym_eig_top: invalid rank");

    const Eigen::MatrixXd S = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    if (eig.info() != Eigen::Success) throw numeric_error("sym_eig_top: eigensolver failed");

    const Index m = A.rows();
    Eigen::MatrixXd U(m, m);
    Eigen::VectorXd lambda(m);
    for (Index c = 0; c < m; ++c) {
        U.col(c) = eig.eigenvectors().col(m - 1 - c);
        lambda[c] = eig.eigenvalues()[m - 1 - c];
    }
    fix_signs(U);

    // Exact ties: order the vectors within each tied group lexicographically.
    Index start = 0;
    while (start < m) {
        Index end = start + 1;
        while (end < m && lambda[end] == lambda[start]) ++end;
        if (end - start > 1) {
            std::vector<Index> idx(end - start);
            std::iota(idx.begin(), idx.end(), start);
            std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
                return lex_less(U.col(a), U.col(b));
            });
            Eigen::MatrixXd block(m, end - start);
            for (Index k = 0; k < end - start; ++k) block.col(k) = U.col(idx[k]);
            U.middleCols(start, end - start) = block;
        }
        start = end;
    }

    SymEig out;
    out.U = U.leftCols(r);
    out.lambda = lambda.head(r);
    return out;
}

Eigen::MatrixXd sym_pinv(const Eigen::MatrixXd& W, double rel_tol) {
    const Eigen::MatrixXd S = 0.5 * (W + W.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    if (eig.info() != Eigen::Success) throw numeric_error("sym_pinv: eigensolver failed");
    const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lmax > 0)) throw numeric_error("sym_pinv: numerically zero matrix");
    const double cut = rel_tol * lmax;
    Eigen::VectorXd inv = eig.eigenvalues();
    for (Index i = 0; i < inv.size(); ++i) inv[i] = inv[i] > cut ? 1.0 / inv[i] : 0.0;
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace ttde
