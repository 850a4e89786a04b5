#pragma once

#include <vector>

#include <Eigen/Core>

#include "ttde/errors.hpp"
#include "ttde/grid.hpp"

namespace ttde {

// Three-index TT core of shape (r_prev, n, r_next), stored as its left
// unfolding: a (r_prev * n) x r_next matrix with row index a*n + i.
// Multi-indices are grouped row-major throughout (first index slowest).
class TtCore {
public:
    TtCore() = default;
    TtCore(Index r_prev, Index n, Index r_next)
        : r_prev_(r_prev), n_(n), r_next_(r_next),
          m_(Eigen::MatrixXd::Zero(r_prev * n, r_next)) {}

    static TtCore from_left_unfolding(Index r_prev, Index n, Eigen::MatrixXd m) {
        if (m.rows() != r_prev * n)
            throw config_error("TtCore: left unfolding has wrong row count");
        TtCore c;
        c.r_prev_ = r_prev;
        c.n_ = n;
        c.r_next_ = m.cols();
        c.m_ = std::move(m);
        return c;
    }

    Index left_rank() const { return r_prev_; }
    Index mode_size() const { return n_; }
    Index right_rank() const { return r_next_; }

    double operator()(Index a, Index i, Index b) const { return m_(a * n_ + i, b); }
    double& operator()(Index a, Index i, Index b) { return m_(a * n_ + i, b); }

    // Matrix G(:, i, :) of shape r_prev x r_next.
    Eigen::MatrixXd slice(Index i) const {
        Eigen::MatrixXd s(r_prev_, r_next_);
        for (Index a = 0; a < r_prev_; ++a) s.row(a) = m_.row(a * n_ + i);
        return s;
    }

    const Eigen::MatrixXd& left_unfolding() const { return m_; }

    // n x (r_prev * r_next) layout with column index a*r_next + b; lets basis
    // tabulations contract against the mode index with a single GEMM.
    Eigen::MatrixXd mode_matrix() const {
        Eigen::MatrixXd m(n_, r_prev_ * r_next_);
        for (Index a = 0; a < r_prev_; ++a)
            for (Index i = 0; i < n_; ++i)
                for (Index b = 0; b < r_next_; ++b)
                    m(i, a * r_next_ + b) = m_(a * n_ + i, b);
        return m;
    }

private:
    Index r_prev_ = 0, n_ = 0, r_next_ = 0;
    Eigen::MatrixXd m_;
};

struct TensorTrain {
    std::vector<TtCore> cores;

    Index order() const { return static_cast<Index>(cores.size()); }

    std::vector<Index> mode_sizes() const {
        std::vector<Index> n(cores.size());
        for (size_t j = 0; j < cores.size(); ++j) n[j] = cores[j].mode_size();
        return n;
    }

    // Rank vector (r_0, r_1, ..., r_d) with boundary ranks 1.
    std::vector<Index> ranks() const {
        std::vector<Index> r(cores.size() + 1, 1);
        for (size_t j = 0; j < cores.size(); ++j) r[j + 1] = cores[j].right_rank();
        return r;
    }

    void validate() const;
};

struct DenseTensor {
    std::vector<Index> mode_sizes;
    Eigen::VectorXd data;  // row-major, first index slowest

    Index size() const {
        Index s = 1;
        for (Index n : mode_sizes) s *= n;
        return s;
    }

    Index flat_index(const std::vector<Index>& idx) const {
        Index f = 0;
        for (size_t j = 0; j < mode_sizes.size(); ++j) f = f * mode_sizes[j] + idx[j];
        return f;
    }

    double operator()(const std::vector<Index>& idx) const { return data[flat_index(idx)]; }
    double& operator()(const std::vector<Index>& idx) { return data[flat_index(idx)]; }

    void validate() const {
        if (data.size() != size())
            throw config_error("DenseTensor: entry count does not match mode sizes");
    }
};

inline constexpr Index kDefaultDenseCap = Index(1) << 24;

// j-th unfolding A^{(j)}: (n_1...n_j) x (n_{j+1}...n_d), row-major grouping.
Eigen::MatrixXd unfold(const DenseTensor& a, Index j);

DenseTensor tt_to_dense(const TensorTrain& t, Index max_entries = kDefaultDenseCap);

// Stacked matrix G_{1:k} of shape n_1...n_k x r_k; orthonormal columns for
// every compressor output in this library.
Eigen::MatrixXd left_stack(const TensorTrain& t, Index k, Index max_entries = kDefaultDenseCap);

// Sum over all multi-indices of A(i)B(i) by left-to-right rank contraction.
double tt_inner(const TensorTrain& a, const TensorTrain& b);

}  // namespace ttde
