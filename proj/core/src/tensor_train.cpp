#include "ttde/tensor_train.hpp"

#include <string>

namespace ttde {

void TensorTrain::validate() const {
    if (cores.empty()) throw config_error("TensorTrain: no cores");
    if (cores.front().left_rank() != 1 || cores.back().right_rank() != 1)
        throw config_error("TensorTrain: boundary ranks must be 1");
    for (size_t j = 0; j + 1 < cores.size(); ++j)
        if (cores[j].right_rank() != cores[j + 1].left_rank())
            throw config_error("TensorTrain: rank mismatch between cores " +
                               std::to_string(j) + " and " + std::to_string(j + 1));
    for (const auto& c : cores)
        if (!c.left_unfolding().allFinite())
            throw numeric_error("TensorTrain: non-finite core entries");
}

Eigen::MatrixXd unfold(const DenseTensor& a, Index j) {
    a.validate();
    const Index d = static_cast<Index>(a.mode_sizes.size());
    if (j < 0 || j > d) throw config_error("unfold: j out of range");
    Index rows = 1, cols = 1;
    for (Index m = 0; m < j; ++m) rows *= a.mode_sizes[m];
    for (Index m = j; m < d; ++m) cols *= a.mode_sizes[m];
    // Row-major storage makes the unfolding a plain reshape.
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                          Eigen::RowMajor>>(a.data.data(), rows, cols);
}

DenseTensor tt_to_dense(const TensorTrain& t, Index max_entries) {
    t.validate();
    const Index d = t.order();
    Index total = 1;
    for (const auto& c : t.cores) {
        total *= c.mode_size();
        if (total > max_entries) throw config_error("tt_to_dense: memory cap exceeded");
    }

    // Left-to-right expansion: rows hold the prefix multi-index, columns the
    // running rank.
    Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);
    for (Index j = 0; j < d; ++j) {
        const TtCore& core = t.cores[j];
        const Index n = core.mode_size();
        const Index rn = core.right_rank();
        Eigen::MatrixXd next(acc.rows() * n, rn);
        for (Index i = 0; i < n; ++i) {
            const Eigen::MatrixXd s = core.slice(i);
            const Eigen::MatrixXd block = acc * s;
            for (Index row = 0; row < acc.rows(); ++row)
                next.row(row * n + i) = block.row(row);
        }
        acc = std::move(next);
    }

    DenseTensor out;
    out.mode_sizes = t.mode_sizes();
    out.data = acc.col(0);
    return out;
}

Eigen::MatrixXd left_stack(const TensorTrain& t, Index k, Index max_entries) {
    t.validate();
    if (k < 1 || k > t.order() - 1) throw config_error("left_stack: k out of range");
    Index rows = 1;
    for (Index j = 0; j < k; ++j) {
        rows *= t.cores[j].mode_size();
        if (rows > max_entries) throw config_error("left_stack: memory cap exceeded");
    }

    Eigen::MatrixXd stack = Eigen::MatrixXd::Ones(1, 1);
    for (Index j = 0; j < k; ++j) {
        const TtCore& core = t.cores[j];
        const Index n = core.mode_size();
        Eigen::MatrixXd next(stack.rows() * n, core.right_rank());
        for (Index i = 0; i < n; ++i) {
            const Eigen::MatrixXd block = stack * core.slice(i);
            for (Index row = 0; row < stack.rows(); ++row)
                next.row(row * n + i) = block.row(row);
        }
        stack = std::move(next);
    }
    return stack;
}

double tt_inner(const TensorTrain& a, const TensorTrain& b) {
    a.validate();
    b.validate();
    if (a.mode_sizes() != b.mode_sizes()) throw config_error("tt_inner: shape mismatch");

    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
    for (Index j = 0; j < a.order(); ++j) {
        const TtCore& ca = a.cores[j];
        const TtCore& cb = b.cores[j];
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(ca.right_rank(), cb.right_rank());
        for (Index i = 0; i < ca.mode_size(); ++i)
            next.noalias() += ca.slice(i).transpose() * m * cb.slice(i);
        m = std::move(next);
    }
    return m(0, 0);
}

}  // namespace ttde
