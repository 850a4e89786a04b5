#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ttde/basis.hpp"
#include "ttde/errors.hpp"

#include "test_helpers.hpp"

using namespace ttde;

TEST_CASE("fourier_eval paper values") {
    CHECK(fourier_eval(1, 0.0, 1.5) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(fourier_eval(2, 0.0, 1.5) == doctest::Approx(1.0 / std::sqrt(1.5)).epsilon(1e-12));
    CHECK(fourier_eval(3, 0.0, 1.5) == doctest::Approx(0.0));
    CHECK(fourier_eval(3, 0.0, 0.7) == doctest::Approx(0.0));
    CHECK_THROWS_AS(fourier_eval(0, 0.0, 1.0), config_error);
}

TEST_CASE("rescaled families have constant first function") {
    const BasisFamily f = BasisFamily::fourier(5, 1.5);
    CHECK(f.eval(1, -1.2) == doctest::Approx(1.0));
    CHECK(f.eval(1, 0.7) == doctest::Approx(1.0));
    const BasisFamily l = BasisFamily::legendre(4);
    CHECK(l.eval(1, 0.3) == doctest::Approx(1.0));
}

TEST_CASE("gram_check: fourier family is orthonormal under its mean-field") {
    const BasisFamily f = BasisFamily::fourier(7, 1.5);
    const Eigen::MatrixXd g = gram_check(f, GridSpec(-1.5, 1.5, 0.01));
    CHECK((g - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("gram_check: legendre family on [0,1]") {
    const BasisFamily l = BasisFamily::legendre(6);
    const Eigen::MatrixXd g = gram_check(l, GridSpec(0.0, 1.0, 0.00005));
    CHECK((g - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("gram_check: n=1 gives the 1x1 identity") {
    const BasisFamily f = BasisFamily::fourier(1, 1.0);
    const Eigen::MatrixXd g = gram_check(f, GridSpec(-1.0, 1.0, 0.01));
    CHECK(g.rows() == 1);
    CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("feature_block basics") {
    const BasisFamily f1 = BasisFamily::fourier(1, 1.5);
    Eigen::VectorXd xs(4);
    xs << -1.0, 0.0, 0.5, 1.2;
    const FeatureBlock ones = feature_block(xs, f1, 1.0);
    CHECK(ones.matrix.rows() == 4);
    CHECK(ones.matrix.cols() == 1);
    CHECK((ones.matrix.array() - 1.0).abs().maxCoeff() == 0.0);

    // N=1, fourier n=3, x=0, alpha=0.01: [1, 0.01*sqrt(2), 0].
    const BasisFamily f3 = BasisFamily::fourier(3, 1.5);
    Eigen::VectorXd x0(1);
    x0 << 0.0;
    const FeatureBlock fb = feature_block(x0, f3, 0.01);
    CHECK(fb.matrix(0, 0) == doctest::Approx(1.0));
    CHECK(fb.matrix(0, 1) == doctest::Approx(0.01 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(fb.matrix(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("feature_block squared norm with tiny alpha") {
    const BasisFamily f = BasisFamily::fourier(4, 1.0);
    Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(10, -0.9, 0.9);
    const FeatureBlock fb = feature_block(xs, f, 1e-300);
    CHECK(fb.matrix.squaredNorm() == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("feature_block rejects out-of-domain samples with a count") {
    const BasisFamily f = BasisFamily::fourier(3, 1.0);
    Eigen::VectorXd xs(3);
    xs << 0.0, 1.5, -2.0;
    CHECK_THROWS_WITH_AS(feature_block(xs, f, 0.5), doctest::Contains("2 samples outside"),
                         config_error);
    CHECK_THROWS_AS(feature_block(xs.head(1), f, 0.0), config_error);   // alpha out of range
    CHECK_THROWS_AS(feature_block(xs.head(1), f, 1.01), config_error);
}

TEST_CASE("feature_block is sample-order equivariant") {
    const BasisFamily f = BasisFamily::fourier(5, 1.0);
    Eigen::VectorXd xs(4);
    xs << -0.5, 0.1, 0.7, 0.9;
    Eigen::VectorXd rev = xs.reverse();
    const FeatureBlock a = feature_block(xs, f, 0.3);
    const FeatureBlock b = feature_block(rev, f, 0.3);
    for (Index i = 0; i < 4; ++i) CHECK((a.matrix.row(i) - b.matrix.row(3 - i)).norm() == 0.0);
}

TEST_CASE("orthonormalize_wrt uniform weight recovers Legendre values") {
    const GridSpec grid(-1.0, 1.0, 0.002);
    const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(grid.points(), 0.5);
    const BasisFamily fam = orthonormalize_wrt(grid, uniform, 3);

    const Eigen::MatrixXd g = gram_check(fam, grid);
    CHECK((g - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);

    // Compare to analytic normalized Legendre on [-1,1] w.r.t. uniform 1/2:
    // psi_2(t) = sqrt(3) t, psi_3(t) = sqrt(5) (3t^2-1)/2.
    for (double t : {-0.8, -0.3, 0.2, 0.9}) {
        CHECK(fam.eval(1, t) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(fam.eval(2, t) == doctest::Approx(std::sqrt(3.0) * t).epsilon(1e-6));
        CHECK(fam.eval(3, t) ==
              doctest::Approx(std::sqrt(5.0) * 0.5 * (3 * t * t - 1)).epsilon(1e-5));
    }
}

TEST_CASE("orthonormalize_wrt n=1 is the constant") {
    const GridSpec grid(0.0, 1.0, 0.01);
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(grid.points(), 1.0);
    const BasisFamily fam = orthonormalize_wrt(grid, w, 1);
    CHECK(fam.eval(1, 0.37) == doctest::Approx(1.0));
}

TEST_CASE("orthonormalize_wrt rejects degenerate weights") {
    const GridSpec grid(0.0, 1.0, 0.1);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.points());
    w[3] = 5.0;
    w[7] = 5.0;  // mass in two cells only
    CHECK_THROWS(orthonormalize_wrt(grid, w, 3));
}

TEST_CASE("integral_vector is e1 under the mean-field") {
    const BasisFamily f = BasisFamily::fourier(7, 1.5);
    const Eigen::VectorXd mf = integral_vector(f, Measure::mean_field);
    CHECK(mf[0] == doctest::Approx(1.0));
    CHECK(mf.tail(6).cwiseAbs().maxCoeff() == 0.0);

    // Quadrature verification of the analytic shortcut.
    const GridSpec quad(-1.5, 1.5, 0.005);
    Eigen::VectorXd byquad = Eigen::VectorXd::Zero(7);
    for (Index k = 0; k < quad.points(); ++k)
        byquad += f.eval_all(quad.center(k)) * f.measure_density(quad.center(k)) * quad.mesh;
    CHECK((byquad - mf).cwiseAbs().maxCoeff() < 1e-9);

    const BasisFamily l = BasisFamily::legendre(5);
    const Eigen::VectorXd lv = integral_vector(l, Measure::lebesgue);
    CHECK(lv[0] == doctest::Approx(1.0));
    CHECK(lv.tail(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("integral_vector of a tabulated family against its own weight") {
    const GridSpec grid(-1.0, 1.0, 0.01);
    Eigen::VectorXd w(grid.points());
    for (Index k = 0; k < grid.points(); ++k)
        w[k] = 1.0 + 0.5 * std::sin(grid.center(k));
    w /= w.sum() * grid.mesh;
    const BasisFamily fam = orthonormalize_wrt(grid, w, 4);
    const Eigen::VectorXd mf = integral_vector(fam, Measure::mean_field);
    CHECK(mf[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(mf.tail(3).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("coefficient map is well conditioned on a resolving grid") {
    // n basis functions sampled above their Nyquist rate: full column rank.
    for (Index n : {3, 5, 7, 9}) {
        const BasisFamily f = BasisFamily::fourier(n, 1.5);
        const GridSpec g(-1.5, 1.5, 3.0 / static_cast<double>(2 * n + 1));
        const Eigen::MatrixXd m = f.tabulate(g);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        CHECK(svd.singularValues()[0] / svd.singularValues()[n - 1] < 1e6);

        const BasisFamily leg = BasisFamily::legendre(n);
        const GridSpec gl(0.0, 1.0, 1.0 / static_cast<double>(2 * n + 1));
        Eigen::JacobiSVD<Eigen::MatrixXd> lsvd(leg.tabulate(gl));
        CHECK(lsvd.singularValues()[0] / lsvd.singularValues()[n - 1] < 1e6);
    }
}
