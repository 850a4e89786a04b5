#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ttde/density_ops.hpp"
#include "ttde/metrics.hpp"
#include "ttde/models.hpp"
#include "ttde/preprocess.hpp"

#include "test_helpers.hpp"

using namespace ttde;

namespace {

SampleSet gaussian_samples(const Eigen::MatrixXd& cov_root, const Eigen::VectorXd& mean,
                           Index count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Index d = mean.size();
    SampleSet s;
    s.data.resize(count, d);
    for (Index i = 0; i < count; ++i) {
        Eigen::VectorXd z(cov_root.cols());
        for (Index j = 0; j < z.size(); ++j) z[j] = gauss(rng);
        s.data.row(i) = (mean + cov_root * z).transpose();
    }
    for (Index j = 0; j < d; ++j) {
        const double lo = s.data.col(j).minCoeff() - 1e-6;
        const double hi = s.data.col(j).maxCoeff() + 1e-6;
        s.box.emplace_back(lo, hi, hi - lo);
    }
    return s;
}

}  // namespace

TEST_CASE("pca_fit returns an orthonormal rotation with sorted spectrum") {
    const SampleSet s = gaussian_samples(Eigen::MatrixXd::Identity(5, 5),
                                         Eigen::VectorXd::Zero(5), 4000, 3);
    const PcaModel pca = pca_fit(s, 5);
    const Eigen::MatrixXd gram = pca.rotation.transpose() * pca.rotation;
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
    for (Index j = 0; j + 1 < 5; ++j) CHECK(pca.eigvals[j] >= pca.eigvals[j + 1]);
    // Isotropic data: eigenvalues are near one another.
    CHECK(pca.eigvals[0] / pca.eigvals[4] < 1.3);
}

TEST_CASE("pca_fit recovers a planted two-dimensional subspace") {
    Eigen::MatrixXd root = Eigen::MatrixXd::Zero(6, 2);
    root(0, 0) = 1.0;
    root(1, 0) = 0.5;
    root(2, 1) = 0.8;
    root(4, 1) = -0.6;
    Eigen::VectorXd mean(6);
    mean << 0.2, -0.1, 0.4, 0.0, 0.3, -0.2;
    const SampleSet s = gaussian_samples(root, mean, 3000, 5);
    const PcaModel pca = pca_fit(s, 2);
    // Reconstruction through the rank-2 map is exact for noiseless planted data.
    for (Index i = 0; i < 50; ++i) {
        const Eigen::VectorXd x = s.data.row(i).transpose();
        const Eigen::VectorXd back =
            pca.rotation * (pca.rotation.transpose() * (x - pca.center)) + pca.center;
        CHECK((x - back).norm() < 1e-8);
    }
}

TEST_CASE("pca_fit at full dimension is an isometry of centered data") {
    const SampleSet s = gaussian_samples(Eigen::MatrixXd::Identity(4, 4),
                                         Eigen::VectorXd::Ones(4), 500, 7);
    const PcaModel pca = pca_fit(s, 4);
    const Eigen::MatrixXd z = pca.transform(s.data);
    const Eigen::MatrixXd centered = s.data.rowwise() - pca.center.transpose();
    for (Index i = 0; i < 20; ++i)
        CHECK(z.row(i).norm() == doctest::Approx(centered.row(i).norm()).epsilon(1e-10));
}

TEST_CASE("streaming PCA matches exact PCA on gapped spectra") {
    Eigen::MatrixXd root = Eigen::MatrixXd::Zero(8, 8);
    for (Index j = 0; j < 8; ++j) root(j, j) = std::pow(0.6, static_cast<double>(j));
    const SampleSet s = gaussian_samples(root, Eigen::VectorXd::Zero(8), 20000, 9);
    const PcaModel exact = pca_fit(s, 3, false);
    const PcaModel stream = pca_fit(s, 3, true);
    // Largest principal angle between the two 3-dim subspaces.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(exact.rotation.transpose() * stream.rotation);
    const double angle = std::acos(std::min(svd.singularValues().minCoeff(), 1.0));
    CHECK(angle < 1e-3);
}

TEST_CASE("pca_fit input validation") {
    SampleSet s;
    s.box = {GridSpec(0, 1, 1), GridSpec(0, 1, 1)};
    s.data = Eigen::MatrixXd::Constant(5, 2, 0.5);
    CHECK_THROWS_AS(pca_fit(s, 3), config_error);  // d' > d
    CHECK_THROWS_AS(pca_fit(s, 1), config_error);  // zero variance
}

TEST_CASE("kde1d integrates to one and tracks the uniform density") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd xs(100000);
    for (Index i = 0; i < xs.size(); ++i) xs[i] = unif(rng);
    const GridSpec grid(0.0, 1.0, 0.01);
    const Kde1d kde = kde1d(xs, grid);
    CHECK(kde.density.minCoeff() >= 0.0);
    CHECK(std::abs(kde.density.sum() * grid.mesh - 1.0) < 1e-12);
    CHECK((kde.density.array() - 1.0).abs().maxCoeff() < 0.05);
}

TEST_CASE("kde1d rejects degenerate samples") {
    const GridSpec grid(0.0, 1.0, 0.1);
    Eigen::VectorXd xs = Eigen::VectorXd::Constant(10, 0.5);
    CHECK_THROWS_AS(kde1d(xs, grid), config_error);
    CHECK_THROWS_AS(kde1d(xs.head(1), grid), config_error);
}

TEST_CASE("kde mean-field plus orthonormalization gives an orthonormal family") {
    const GmSpec spec{1, 1.5, 0.1};
    const SampleSet s = gm_sample(spec, 20000, 13);
    const GridSpec grid(-1.5, 1.5, 0.05);
    const Kde1d kde = kde1d(s.data.col(0), grid);
    const BasisFamily fam = orthonormalize_wrt(grid, kde.density, 8);
    const Eigen::MatrixXd gram = gram_check(fam, grid);
    CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fit_general with identity map and uniform mean-field is the plain fit") {
    const GmSpec spec{3, 1.5, 0.1};
    const SampleSet s = gm_sample(spec, 8000, 15);

    GeneralFitOptions opt;
    opt.n_basis = 9;
    opt.alpha = 0.01;
    opt.use_pca = false;
    opt.kde_mean_field = false;
    opt.algo.algo = Algo::svd_kn;
    opt.algo.ranks = uniform_ranks(3, 3);
    const DensityModel general = fit_general(s, opt);

    const std::vector<BasisFamily> bases(3, BasisFamily::fourier(9, 1.5));
    std::vector<MeanField1d> mf;
    for (const auto& g : spec.box()) mf.push_back(MeanField1d::uniform(g));
    const DensityModel plain = normalize(
        deconvolve(fit(s, bases, 0.01, opt.algo), 0.01, 0.0, bases, mf, spec.box()));

    CHECK(!general.pca.has_value());
    Eigen::VectorXd x(3);
    x << 0.3, -0.8, 1.1;
    CHECK(eval_point(general, x) == doctest::Approx(eval_point(plain, x)).epsilon(1e-8));
    CHECK(rel_l2(general, plain) < 1e-8);
}

TEST_CASE("fit_general on an anisotropic Gaussian with 99% variance in 3 axes") {
    const Index d = 6;
    Eigen::MatrixXd root = Eigen::MatrixXd::Zero(d, d);
    root.diagonal() << 1.0, 0.7, 0.5, 0.05, 0.04, 0.03;
    // Rotate so the principal axes are not coordinate-aligned.
    Eigen::MatrixXd mix = Eigen::MatrixXd::Random(d, d);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(mix);
    const Eigen::MatrixXd q = qr.householderQ();
    const SampleSet s = gaussian_samples(q * root, Eigen::VectorXd::Zero(d), 20000, 17);

    GeneralFitOptions opt;
    opt.n_basis = 11;
    opt.alpha = 0.01;
    opt.pca_dim = 3;
    opt.algo.algo = Algo::svd_kn;
    opt.algo.ranks = uniform_ranks(3, 3);
    opt.mesh = 0.05;
    const DensityModel m = fit_general(s, opt);
    CHECK(m.pca.has_value());
    CHECK(m.dim() == 3);

    SampleDiagnostics diag;
    const SampleSet redraw = conditional_sample(m, 20000, 19, &diag);
    CHECK(second_moment_error(redraw, s) < 0.1);
}

TEST_CASE("fit_general evaluates through the PCA map") {
    const GmSpec spec{4, 1.5, 0.1};
    const SampleSet s = gm_sample(spec, 5000, 21);
    GeneralFitOptions opt;
    opt.n_basis = 7;
    opt.alpha = 0.01;
    opt.pca_dim = 4;
    opt.algo.algo = Algo::svd_kn;
    opt.algo.ranks = uniform_ranks(4, 3);
    const DensityModel m = fit_general(s, opt);
    const Eigen::VectorXd x = s.data.row(0).transpose();
    CHECK(std::isfinite(eval_point(m, x)));
    CHECK(std::abs(grid_integral(m) - 1.0) < 1e-9);
}
