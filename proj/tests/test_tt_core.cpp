#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "ttde/compress.hpp"
#include "ttde/svd.hpp"
#include "ttde/tensor_train.hpp"

#include "test_helpers.hpp"

using namespace ttde;

namespace {

DenseTensor counting_tensor() {
    // A(i1,i2,i3) = i1 + 2*i2 + 4*i3 on sizes (2,2,2).
    DenseTensor a;
    a.mode_sizes = {2, 2, 2};
    a.data.resize(8);
    test::for_each_index(a.mode_sizes, [&](const std::vector<Index>& idx) {
        a(idx) = static_cast<double>(idx[0] + 2 * idx[1] + 4 * idx[2]);
    });
    return a;
}

}  // namespace

TEST_CASE("unfold shapes and boundary cases") {
    const DenseTensor a = counting_tensor();
    CHECK(unfold(a, 1).rows() == 2);
    CHECK(unfold(a, 1).cols() == 4);
    CHECK(unfold(a, 0).rows() == 1);
    CHECK(unfold(a, 0).cols() == 8);
    CHECK(unfold(a, 3).rows() == 8);
    CHECK(unfold(a, 3).cols() == 1);
    CHECK_THROWS_AS(unfold(a, 4), config_error);
    CHECK_THROWS_AS(unfold(a, -1), config_error);
}

TEST_CASE("unfold entries follow row-major multi-index grouping") {
    const DenseTensor a = counting_tensor();
    const Eigen::MatrixXd a2 = unfold(a, 2);
    // Brute-force index enumeration: row = i1*2 + i2, col = i3.
    test::for_each_index(a.mode_sizes, [&](const std::vector<Index>& idx) {
        CHECK(a2(idx[0] * 2 + idx[1], idx[2]) == a(idx));
    });
    CHECK(a2(1 * 2 + 1, 0) == doctest::Approx(1.0 + 2.0));
}

TEST_CASE("unfold is a bijection on entries") {
    const TensorTrain t = test::random_tt(4, 3, 2, 11);
    const DenseTensor a = tt_to_dense(t);
    for (Index j = 0; j <= 4; ++j) {
        const Eigen::MatrixXd m = unfold(a, j);
        // Refold by reading the matrix in row-major order.
        Index at = 0;
        DenseTensor back;
        back.mode_sizes = a.mode_sizes;
        back.data.resize(a.size());
        for (Index r = 0; r < m.rows(); ++r)
            for (Index c = 0; c < m.cols(); ++c) back.data[at++] = m(r, c);
        CHECK((back.data - a.data).norm() == 0.0);
    }
}

TEST_CASE("tt_to_dense rank-1 outer product") {
    Eigen::VectorXd u(2), v(3);
    u << 1.0, -2.0;
    v << 0.5, 1.5, -1.0;
    TensorTrain t;
    t.cores.push_back(TtCore::from_left_unfolding(1, 2, u));
    t.cores.push_back(TtCore::from_left_unfolding(1, 3, v));
    const DenseTensor a = tt_to_dense(t);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 3; ++j)
            CHECK(a({i, j}) == doctest::Approx(u[i] * v[j]).epsilon(1e-14));
}

TEST_CASE("tt_to_dense delta tensor from unit-slice cores") {
    TensorTrain t;
    for (int j = 0; j < 3; ++j) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 1);
        m(0, 0) = 1.0;
        t.cores.push_back(TtCore::from_left_unfolding(1, 2, m));
    }
    const DenseTensor a = tt_to_dense(t);
    test::for_each_index(a.mode_sizes, [&](const std::vector<Index>& idx) {
        const bool origin = idx[0] == 0 && idx[1] == 0 && idx[2] == 0;
        CHECK(a(idx) == (origin ? 1.0 : 0.0));
    });
}

TEST_CASE("tt_to_dense agrees with per-entry chain products") {
    const TensorTrain t = test::random_tt(4, 3, 2, 5);
    const DenseTensor a = tt_to_dense(t);
    test::for_each_index(a.mode_sizes, [&](const std::vector<Index>& idx) {
        CHECK(a(idx) == doctest::Approx(test::tt_entry(t, idx)).epsilon(1e-12));
    });
}

TEST_CASE("tt_to_dense memory cap") {
    const TensorTrain t = test::random_tt(8, 4, 2, 3);
    CHECK_THROWS_AS(tt_to_dense(t, 1000), config_error);
}

TEST_CASE("tt_svd round trip reproduces the tensor at its own ranks") {
    const TensorTrain t = test::random_tt(4, 3, 2, 17);
    const DenseTensor a = tt_to_dense(t);
    const TensorTrain back = tt_svd_naive(a, {2, 2, 2});
    const DenseTensor b = tt_to_dense(back);
    CHECK(test::rel_frobenius(b.data, a.data) < 1e-10);
}

TEST_CASE("left_stack of the first core is its reshape") {
    const TensorTrain t = test::random_tt(3, 4, 2, 7);
    const Eigen::MatrixXd s1 = left_stack(t, 1);
    CHECK(s1.rows() == 4);
    CHECK(s1.cols() == 2);
    CHECK((s1 - t.cores[0].left_unfolding()).norm() == 0.0);
}

TEST_CASE("left_stack columns are orthonormal for QR-built cores") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Index d = 3, n = 2, r = 2;
    TensorTrain t;
    Index r_prev = 1;
    for (Index j = 0; j < d; ++j) {
        const Index r_next = j + 1 == d ? 1 : r;
        Eigen::MatrixXd m(r_prev * n, r_next);
        for (Index i = 0; i < m.rows(); ++i)
            for (Index c = 0; c < m.cols(); ++c) m(i, c) = gauss(rng);
        if (j + 1 < d) {
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
            m = Eigen::MatrixXd(qr.householderQ()) .leftCols(r_next);
        }
        t.cores.push_back(TtCore::from_left_unfolding(r_prev, n, std::move(m)));
        r_prev = r_next;
    }
    for (Index k = 1; k <= d - 1; ++k) {
        const Eigen::MatrixXd s = left_stack(t, k);
        const Eigen::MatrixXd gram = s.transpose() * s;
        CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <
              1e-10);
    }
}

TEST_CASE("tt_inner matches the dense Frobenius inner product") {
    const TensorTrain t = test::random_tt(4, 3, 2, 23);
    const DenseTensor a = tt_to_dense(t);
    CHECK(tt_inner(t, t) >= 0.0);
    CHECK(tt_inner(t, t) == doctest::Approx(a.data.squaredNorm()).epsilon(1e-10));

    const TensorTrain u = test::random_tt(4, 3, 3, 29);
    const DenseTensor b = tt_to_dense(u);
    CHECK(tt_inner(t, u) == doctest::Approx(a.data.dot(b.data)).epsilon(1e-10));
}

TEST_CASE("tt_inner with the zero TT is zero") {
    const TensorTrain t = test::random_tt(3, 3, 2, 31);
    TensorTrain zero;
    for (Index j = 0; j < 3; ++j)
        zero.cores.push_back(TtCore(j == 0 ? 1 : 2, 3, j == 2 ? 1 : 2));
    CHECK(tt_inner(t, zero) == 0.0);
}

TEST_CASE("tt_inner separates over rank-1 factors") {
    Eigen::VectorXd a(3), b(4), c(3), d(4);
    a << 1, 2, 3;
    b << -1, 0.5, 2, 1;
    c << 0.3, -0.2, 1;
    d << 2, 1, 0, -1;
    auto rank1 = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        TensorTrain t;
        t.cores.push_back(TtCore::from_left_unfolding(1, x.size(), x));
        t.cores.push_back(TtCore::from_left_unfolding(1, y.size(), y));
        return t;
    };
    CHECK(tt_inner(rank1(a, b), rank1(c, d)) == doctest::Approx(a.dot(c) * b.dot(d)));
}

TEST_CASE("tt_inner shape mismatch") {
    CHECK_THROWS_AS(tt_inner(test::random_tt(3, 3, 2, 1), test::random_tt(3, 4, 2, 1)),
                    config_error);
}

TEST_CASE("truncated_svd on the identity") {
    SvdConvention conv;
    conv.truncation_rank = 2;
    const TruncatedSvd svd = truncated_svd(Eigen::MatrixXd::Identity(4, 4), conv);
    CHECK(svd.sigma[0] == doctest::Approx(1.0));
    CHECK(svd.sigma[1] == doctest::Approx(1.0));
}

TEST_CASE("truncated_svd reconstructs a rank-1 matrix exactly") {
    Eigen::VectorXd u(5), v(4);
    u << 1, -2, 0.5, 3, -1;
    v << 2, 1, -1, 0.5;
    const Eigen::MatrixXd m = u * v.transpose();
    SvdConvention conv;
    conv.truncation_rank = 1;
    const TruncatedSvd svd = truncated_svd(m, conv);
    const Eigen::MatrixXd back = svd.U * svd.sigma.asDiagonal() * svd.V.transpose();
    CHECK((back - m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("truncated_svd right subspace matches the reference eigensolver") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd m(6, 8);
    for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < 8; ++j) m(i, j) = gauss(rng);

    SvdConvention conv;
    conv.truncation_rank = 3;
    const TruncatedSvd svd = truncated_svd(m, conv);

    // Reference: eigenvectors of M^T M.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.transpose() * m);
    Eigen::MatrixXd vref(8, 3);
    for (Index c = 0; c < 3; ++c) vref.col(c) = eig.eigenvectors().col(7 - c);

    // Largest principal angle via the projector difference (its spectral
    // norm is the sine of the angle).
    const Eigen::MatrixXd proj_diff =
        svd.V * svd.V.transpose() - vref * vref.transpose();
    CHECK(proj_diff.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("truncated_svd at full rank reconstructs to 1e-10") {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd m(5, 7);
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 7; ++j) m(i, j) = gauss(rng);
    SvdConvention conv;
    conv.truncation_rank = 5;
    const TruncatedSvd svd = truncated_svd(m, conv);
    const Eigen::MatrixXd back = svd.U * svd.sigma.asDiagonal() * svd.V.transpose();
    CHECK((back - m).norm() / m.norm() < 1e-10);
}

TEST_CASE("truncated_svd rejects non-finite input and bad ranks") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    SvdConvention conv;
    conv.truncation_rank = 3;
    CHECK_THROWS_AS(truncated_svd(m, conv), config_error);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    conv.truncation_rank = 1;
    CHECK_THROWS_AS(truncated_svd(m, conv), numeric_error);
}

TEST_CASE("TensorTrain validation catches malformed trains") {
    TensorTrain t = test::random_tt(3, 2, 2, 3);
    t.cores[1] = TtCore(3, 2, 2);  // rank mismatch with core 0
    CHECK_THROWS_AS(t.validate(), config_error);
}
