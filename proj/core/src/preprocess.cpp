#include "ttde/preprocess.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "ttde/density_ops.hpp"
#include "ttde/errors.hpp"
#include "ttde/svd.hpp"

namespace ttde {

namespace {

constexpr Index kBlock = 8192;

PcaModel pca_exact(const Eigen::MatrixXd& x, Index d_prime) {
    const Index n = x.rows();
    const Eigen::VectorXd center = x.colwise().mean().transpose();
    const Eigen::MatrixXd xc = x.rowwise() - center.transpose();
    const Eigen::MatrixXd cov = xc.transpose() * xc / static_cast<double>(n - 1);
    const SymEig eig = sym_eig_top(cov, d_prime);
    PcaModel m;
    m.rotation = eig.U;
    m.center = center;
    m.eigvals = eig.lambda;
    return m;
}

PcaModel pca_streaming(const Eigen::MatrixXd& x, Index d_prime) {
    const Index n = x.rows();
    const Index d = x.cols();
    const Eigen::VectorXd center = x.colwise().mean().transpose();

    // Block subspace iteration: Y = Cov * Q accumulated over sample blocks.
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(d, d_prime);
    for (int pass = 0; pass < 4; ++pass) {
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(d, d_prime);
        for (Index i0 = 0; i0 < n; i0 += kBlock) {
            const Index len = std::min(kBlock, n - i0);
            const Eigen::MatrixXd xc = x.middleRows(i0, len).rowwise() - center.transpose();
            y.noalias() += xc.transpose() * (xc * q);
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
        q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d_prime);
    }

    // Rayleigh quotient on the converged subspace for the spectrum and to
    // align the basis with the covariance eigenvectors.
    Eigen::MatrixXd small = Eigen::MatrixXd::Zero(d_prime, d_prime);
    for (Index i0 = 0; i0 < n; i0 += kBlock) {
        const Index len = std::min(kBlock, n - i0);
        const Eigen::MatrixXd zc = (x.middleRows(i0, len).rowwise() - center.transpose()) * q;
        small.noalias() += zc.transpose() * zc;
    }
    small /= static_cast<double>(n - 1);
    const SymEig eig = sym_eig_top(small, d_prime);

    PcaModel m;
    m.rotation = q * eig.U;
    fix_signs(m.rotation);
    m.center = center;
    m.eigvals = eig.lambda;
    return m;
}

}  // namespace

PcaModel pca_fit(const SampleSet& s, Index d_prime, bool streaming) {
    s.validate();
    if (s.count() < 2) throw config_error("pca_fit: at least two samples required");
    if (d_prime < 1 || d_prime > s.dim()) throw config_error("pca_fit: d' out of range");
    const Eigen::RowVectorXd mean = s.data.colwise().mean();
    const double max_var = (s.data.rowwise() - mean).colwise().squaredNorm().maxCoeff();
    if (!(max_var > 0)) throw config_error("pca_fit: zero-variance data");
    return streaming ? pca_streaming(s.data, d_prime) : pca_exact(s.data, d_prime);
}

Kde1d kde1d(const Eigen::VectorXd& samples, const GridSpec& grid, double bandwidth) {
    const Index n = samples.size();
    if (n < 2) throw config_error("kde1d: at least two samples required");
    const double mean = samples.mean();
    const double var = (samples.array() - mean).square().sum() / static_cast<double>(n - 1);
    if (!(var > 0)) throw config_error("kde1d: zero-variance samples");
    const double bw =
        bandwidth > 0 ? bandwidth
                      : 1.06 * std::sqrt(var) * std::pow(static_cast<double>(n), -0.2);

    const Index g = grid.points();
    Eigen::VectorXd density = Eigen::VectorXd::Zero(g);
    const double norm = 1.0 / (static_cast<double>(n) * bw * std::sqrt(2.0 * 3.14159265358979323846));
    auto kernel_sum = [&](double x, double xi) {
        // Reflect at both box edges so bounded supports keep their mass.
        double acc = 0.0;
        for (const double y : {xi, 2.0 * grid.lo - xi, 2.0 * grid.hi - xi}) {
            const double t = (x - y) / bw;
            if (std::abs(t) < 8.0) acc += std::exp(-0.5 * t * t);
        }
        return acc;
    };
    for (Index k = 0; k < g; ++k) {
        const double x = grid.center(k);
        double acc = 0.0;
        for (Index i = 0; i < n; ++i) acc += kernel_sum(x, samples[i]);
        density[k] = acc * norm;
    }
    const double mass = density.sum() * grid.mesh;
    if (!(mass > 0)) throw numeric_error("kde1d: zero total mass on the grid");
    density /= mass;

    Kde1d out;
    out.grid = grid;
    out.density = std::move(density);
    out.bandwidth = bw;
    return out;
}

DensityModel fit_general(const SampleSet& s, const GeneralFitOptions& opt) {
    s.validate();
    const Index d = s.dim();
    const Index d_prime = opt.use_pca ? (opt.pca_dim > 0 ? opt.pca_dim : d) : d;

    Eigen::MatrixXd z;
    std::optional<PcaMap> map;
    if (opt.use_pca) {
        const PcaModel pca = pca_fit(s, d_prime, opt.streaming_pca);
        z = pca.transform(s.data);
        map = PcaMap{pca.rotation, pca.center};
    } else {
        z = s.data;
    }

    std::vector<GridSpec> grids;
    std::vector<BasisFamily> bases;
    std::vector<MeanField1d> mean_field;
    for (Index j = 0; j < d_prime; ++j) {
        GridSpec grid;
        if (!opt.use_pca) {
            grid = s.box[static_cast<size_t>(j)];
        } else {
            const Index n = z.rows();
            const double mean = z.col(j).mean();
            const double sd = std::sqrt((z.col(j).array() - mean).square().sum() /
                                        static_cast<double>(n - 1));
            const double pad = std::max(opt.pad_bandwidths * 1.06 * sd *
                                            std::pow(static_cast<double>(n), -0.2),
                                        2.0 * opt.mesh);
            const double lo =
                std::floor((z.col(j).minCoeff() - pad) / opt.mesh) * opt.mesh;
            const double hi = std::ceil((z.col(j).maxCoeff() + pad) / opt.mesh) * opt.mesh;
            grid = GridSpec(lo, hi, opt.mesh);
        }

        if (opt.kde_mean_field) {
            const Kde1d kde = kde1d(z.col(j), grid);
            bases.push_back(orthonormalize_wrt(grid, kde.density, opt.n_basis));
            mean_field.push_back(MeanField1d::tabulated(grid, kde.density));
        } else if (std::abs(grid.lo + grid.hi) < 1e-12) {
            bases.push_back(BasisFamily::fourier(opt.n_basis, grid.hi));
            mean_field.push_back(MeanField1d::uniform(grid));
        } else {
            const Eigen::VectorXd uniform =
                Eigen::VectorXd::Constant(grid.points(), 1.0 / (grid.hi - grid.lo));
            bases.push_back(orthonormalize_wrt(grid, uniform, opt.n_basis));
            mean_field.push_back(MeanField1d::uniform(grid));
        }
        grids.push_back(grid);
    }

    SampleSet zs;
    zs.data = z;
    zs.box = grids;
    zs.validate();

    const TensorTrain coeff = fit(zs, bases, opt.alpha, opt.algo);
    DensityModel model = deconvolve(coeff, opt.alpha, opt.lambda, std::move(bases),
                                    std::move(mean_field), std::move(grids));
    model.pca = map;
    return normalize(std::move(model));
}

}  // namespace ttde
