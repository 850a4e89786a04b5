#include "ttde/density_ops.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ttde/errors.hpp"

namespace ttde {

void DensityModel::validate() const {
    coeff.validate();
    const Index d = coeff.order();
    if (static_cast<Index>(basis.size()) != d || static_cast<Index>(mean_field.size()) != d ||
        static_cast<Index>(box.size()) != d)
        throw config_error("DensityModel: per-dimension metadata does not match order");
    for (Index j = 0; j < d; ++j) {
        const auto& b = basis[static_cast<size_t>(j)];
        const auto& g = box[static_cast<size_t>(j)];
        if (coeff.cores[static_cast<size_t>(j)].mode_size() != b.n)
            throw config_error("DensityModel: core mode size does not match basis size");
        if (g.lo < b.domain_lo() - 1e-9 || g.hi > b.domain_hi() + 1e-9)
            throw config_error("DensityModel: box exceeds basis domain in dimension " +
                               std::to_string(j + 1));
    }
    if (pca) {
        if (pca->rotation.cols() != d)
            throw config_error("DensityModel: PCA rotation columns must match model order");
        if (pca->center.size() != pca->rotation.rows())
            throw config_error("DensityModel: PCA center size must match rotation rows");
    }
    if (!(norm_const > 0) || !std::isfinite(norm_const))
        throw numeric_error("DensityModel: invalid normalization constant");
}

Eigen::MatrixXd chain_factor(const DensityModel& m, Index j, double x) {
    const TtCore& core = m.coeff.cores[static_cast<size_t>(j)];
    const Eigen::VectorXd phi = m.basis[static_cast<size_t>(j)].eval_all(x);
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(core.left_rank(), core.right_rank());
    const Eigen::MatrixXd& lu = core.left_unfolding();
    for (Index a = 0; a < core.left_rank(); ++a)
        f.row(a) = phi.transpose() * lu.middleRows(a * core.mode_size(), core.mode_size());
    return f;
}

GridChain tabulate_chain(const DensityModel& m) {
    m.validate();
    const Index d = m.dim();
    GridChain chain;
    chain.factors.resize(static_cast<size_t>(d));
    chain.mu.resize(static_cast<size_t>(d));
    for (Index j = 0; j < d; ++j) {
        const GridSpec& g = m.box[static_cast<size_t>(j)];
        const Index cells = g.points();
        auto& fj = chain.factors[static_cast<size_t>(j)];
        fj.reserve(static_cast<size_t>(cells));
        Eigen::VectorXd mu(cells);
        for (Index k = 0; k < cells; ++k) {
            fj.push_back(chain_factor(m, j, g.center(k)));
            mu[k] = m.mean_field[static_cast<size_t>(j)].density(g.center(k));
        }
        chain.mu[static_cast<size_t>(j)] = std::move(mu);
    }
    return chain;
}

namespace {

Eigen::VectorXd map_to_model_space(const DensityModel& m, const Eigen::VectorXd& x) {
    if (!m.pca) return x;
    if (x.size() != m.pca->rotation.rows())
        throw config_error("eval_point: point dimension does not match PCA map");
    return m.pca->rotation.transpose() * (x - m.pca->center);
}

// Mass (A0), first-moment (A1) and second-moment (A2) contractions of each
// dimension under the grid quadrature.
struct MomentFactors {
    std::vector<Eigen::MatrixXd> a0, a1, a2;
};

MomentFactors moment_factors(const DensityModel& m, const GridChain& chain) {
    MomentFactors f;
    const Index d = m.dim();
    for (Index j = 0; j < d; ++j) {
        const GridSpec& g = m.box[static_cast<size_t>(j)];
        const auto& fj = chain.factors[static_cast<size_t>(j)];
        const auto& mu = chain.mu[static_cast<size_t>(j)];
        Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(fj[0].rows(), fj[0].cols());
        Eigen::MatrixXd a1 = a0, a2 = a0;
        for (Index k = 0; k < g.points(); ++k) {
            const double w = mu[k] * g.mesh;
            const double x = g.center(k);
            a0 += w * fj[static_cast<size_t>(k)];
            a1 += w * x * fj[static_cast<size_t>(k)];
            a2 += w * x * x * fj[static_cast<size_t>(k)];
        }
        f.a0.push_back(std::move(a0));
        f.a1.push_back(std::move(a1));
        f.a2.push_back(std::move(a2));
    }
    return f;
}

double chain_scalar(const std::vector<Eigen::MatrixXd>& factors) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);
    for (const auto& f : factors) acc = acc * f;
    return acc(0, 0);
}

}  // namespace

double eval_point(const DensityModel& m, const Eigen::VectorXd& x) {
    const Eigen::VectorXd z = map_to_model_space(m, x);
    if (z.size() != m.dim()) throw config_error("eval_point: dimension mismatch");
    double mu_prod = 1.0;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);
    for (Index j = 0; j < m.dim(); ++j) {
        const GridSpec& g = m.box[static_cast<size_t>(j)];
        if (!g.contains(z[j]))
            throw config_error("eval_point: coordinate " + std::to_string(j + 1) +
                               " outside the model box");
        mu_prod *= m.mean_field[static_cast<size_t>(j)].density(z[j]);
        acc = acc * chain_factor(m, j, z[j]);
    }
    return mu_prod * acc(0, 0) / m.norm_const;
}

double grid_integral(const DensityModel& m) {
    const GridChain chain = tabulate_chain(m);
    const MomentFactors f = moment_factors(m, chain);
    return chain_scalar(f.a0) / m.norm_const;
}

DensityModel normalize(DensityModel m) {
    m.validate();
    const double z = grid_integral(m) * m.norm_const;  // integral at Z = 1
    if (!(z > 0) || !std::isfinite(z))
        throw numeric_error("normalize: nonpositive or non-finite total integral");
    m.norm_const = z;
    return m;
}

DensityModel marginal(const DensityModel& m, Index k) {
    m.validate();
    const Index d = m.dim();
    if (k < 1 || k > d) throw config_error("marginal: k out of range");
    if (k == d) {
        DensityModel out = m;
        out.pca.reset();
        return out;
    }

    // Right message: product of mean-field integrals of the trailing cores.
    Eigen::MatrixXd rho =
        Eigen::MatrixXd::Identity(m.coeff.cores[static_cast<size_t>(k)].left_rank(),
                                  m.coeff.cores[static_cast<size_t>(k)].left_rank());
    for (Index j = k; j < d; ++j) {
        const GridSpec& g = m.box[static_cast<size_t>(j)];
        const TtCore& core = m.coeff.cores[static_cast<size_t>(j)];
        Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(core.left_rank(), core.right_rank());
        for (Index cell = 0; cell < g.points(); ++cell) {
            const double w = m.mean_field[static_cast<size_t>(j)].density(g.center(cell)) * g.mesh;
            a0 += w * chain_factor(m, j, g.center(cell));
        }
        rho = rho * a0;
    }

    DensityModel out;
    out.alpha = m.alpha;
    out.lambda = m.lambda;
    out.norm_const = m.norm_const;
    out.basis.assign(m.basis.begin(), m.basis.begin() + k);
    out.mean_field.assign(m.mean_field.begin(), m.mean_field.begin() + k);
    out.box.assign(m.box.begin(), m.box.begin() + k);
    out.coeff.cores.assign(m.coeff.cores.begin(), m.coeff.cores.begin() + k);

    TtCore& last = out.coeff.cores.back();
    TtCore folded(last.left_rank(), last.mode_size(), 1);
    for (Index a = 0; a < last.left_rank(); ++a)
        for (Index i = 0; i < last.mode_size(); ++i) {
            double v = 0;
            for (Index b = 0; b < last.right_rank(); ++b) v += last(a, i, b) * rho(b, 0);
            folded(a, i, 0) = v;
        }
    last = std::move(folded);
    out.validate();
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

SampleSet conditional_sample(const DensityModel& m, Index count, std::uint64_t seed,
                             SampleDiagnostics* diagnostics) {
    m.validate();
    if (count < 1) throw config_error("conditional_sample: count must be >= 1");
    if (std::abs(grid_integral(m) - 1.0) > 1e-6)
        throw config_error("conditional_sample: model is not normalized");

    const Index d = m.dim();
    const GridChain chain = tabulate_chain(m);
    const MomentFactors mf = moment_factors(m, chain);

    // Right marginal messages R_j = A0_{j+1} ... A0_d.
    std::vector<Eigen::VectorXd> right(static_cast<size_t>(d + 1));
    right[static_cast<size_t>(d)] = Eigen::VectorXd::Ones(1);
    for (Index j = d - 1; j >= 0; --j)
        right[static_cast<size_t>(j)] = mf.a0[static_cast<size_t>(j)] * right[static_cast<size_t>(j) + 1];

    // Per dimension: G x r_{j-1} table of (mu(g) * A_j(g) * R_{j+1})^T rows, so
    // each conditional is one matrix-vector product with the left message.
    std::vector<Eigen::MatrixXd> cond_tab(static_cast<size_t>(d));
    for (Index j = 0; j < d; ++j) {
        const GridSpec& g = m.box[static_cast<size_t>(j)];
        const auto& fj = chain.factors[static_cast<size_t>(j)];
        Eigen::MatrixXd tab(g.points(), fj[0].rows());
        for (Index cell = 0; cell < g.points(); ++cell)
            tab.row(cell) = chain.mu[static_cast<size_t>(j)][cell] *
                            (fj[static_cast<size_t>(cell)] * right[static_cast<size_t>(j) + 1])
                                .transpose();
        cond_tab[static_cast<size_t>(j)] = std::move(tab);
    }

    SampleDiagnostics diag;
    Eigen::MatrixXd model_pts(count, d);
    Index kept = 0;
    for (Index s = 0; s < count; ++s) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s))));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Eigen::RowVectorXd left = Eigen::RowVectorXd::Ones(1);
        Eigen::RowVectorXd z(d);
        bool ok = true;
        for (Index j = 0; j < d && ok; ++j) {
            const GridSpec& g = m.box[static_cast<size_t>(j)];
            Eigen::VectorXd f = cond_tab[static_cast<size_t>(j)] * left.transpose();
            double pos = 0, neg = 0;
            for (Index cell = 0; cell < f.size(); ++cell) {
                if (f[cell] < 0) {
                    neg -= f[cell];
                    f[cell] = 0;
                } else {
                    pos += f[cell];
                }
            }
            if (!(pos > 0)) {
                ok = false;
                break;
            }
            diag.clipped_mass_total += neg / pos;

            double u = unif(rng) * pos;
            Index cell = 0;
            for (; cell + 1 < f.size(); ++cell) {
                if (u <= f[cell]) break;
                u -= f[cell];
            }
            const double x = g.center(cell) + (unif(rng) - 0.5) * g.mesh;
            z[j] = x;

            left = left * chain_factor(m, j, x);
            const double norm = left.norm();
            if (!(norm > 0) || !std::isfinite(norm)) {
                ok = false;
                break;
            }
            left /= norm;
        }
        if (!ok) {
            ++diag.aborted;
            continue;
        }
        model_pts.row(kept++) = z;
    }
    if (kept == 0) throw numeric_error("conditional_sample: every sample aborted");
    model_pts.conservativeResize(kept, d);

    SampleSet out;
    if (m.pca) {
        out.data = (model_pts * m.pca->rotation.transpose()).rowwise() +
                   m.pca->center.transpose();
        for (Index j = 0; j < out.data.cols(); ++j) {
            const double lo = out.data.col(j).minCoeff();
            const double hi = out.data.col(j).maxCoeff();
            const double pad = std::max(1e-9, 1e-9 * (hi - lo));
            out.box.emplace_back(lo - pad, hi + pad, hi - lo + 2 * pad);
        }
    } else {
        out.data = model_pts;
        out.box = m.box;
    }
    if (diagnostics) *diagnostics = diag;
    out.validate();
    return out;
}

Eigen::VectorXd moment1(const DensityModel& m) {
    const GridChain chain = tabulate_chain(m);
    const MomentFactors f = moment_factors(m, chain);
    const Index d = m.dim();

    std::vector<Eigen::RowVectorXd> prefix(static_cast<size_t>(d + 1));
    std::vector<Eigen::VectorXd> suffix(static_cast<size_t>(d + 1));
    prefix[0] = Eigen::RowVectorXd::Ones(1);
    suffix[static_cast<size_t>(d)] = Eigen::VectorXd::Ones(1);
    for (Index j = 0; j < d; ++j) prefix[static_cast<size_t>(j) + 1] = prefix[static_cast<size_t>(j)] * f.a0[static_cast<size_t>(j)];
    for (Index j = d - 1; j >= 0; --j)
        suffix[static_cast<size_t>(j)] = f.a0[static_cast<size_t>(j)] * suffix[static_cast<size_t>(j) + 1];
    const double total = prefix[static_cast<size_t>(d)](0, 0);
    if (!(std::abs(total) > 0)) throw numeric_error("moment1: zero total mass");

    Eigen::VectorXd m1(d);
    for (Index j = 0; j < d; ++j)
        m1[j] = (prefix[static_cast<size_t>(j)] * f.a1[static_cast<size_t>(j)] *
                 suffix[static_cast<size_t>(j) + 1])(0, 0) /
                total;
    if (!m.pca) return m1;
    return m.pca->rotation * m1 + m.pca->center;
}

Eigen::MatrixXd moment2(const DensityModel& m) {
    const GridChain chain = tabulate_chain(m);
    const MomentFactors f = moment_factors(m, chain);
    const Index d = m.dim();

    std::vector<Eigen::RowVectorXd> prefix(static_cast<size_t>(d + 1));
    std::vector<Eigen::VectorXd> suffix(static_cast<size_t>(d + 1));
    prefix[0] = Eigen::RowVectorXd::Ones(1);
    suffix[static_cast<size_t>(d)] = Eigen::VectorXd::Ones(1);
    for (Index j = 0; j < d; ++j) prefix[static_cast<size_t>(j) + 1] = prefix[static_cast<size_t>(j)] * f.a0[static_cast<size_t>(j)];
    for (Index j = d - 1; j >= 0; --j)
        suffix[static_cast<size_t>(j)] = f.a0[static_cast<size_t>(j)] * suffix[static_cast<size_t>(j) + 1];
    const double total = prefix[static_cast<size_t>(d)](0, 0);
    if (!(std::abs(total) > 0)) throw numeric_error("moment2: zero total mass");

    Eigen::MatrixXd m2(d, d);
    Eigen::VectorXd m1(d);
    for (Index j = 0; j < d; ++j) {
        m2(j, j) = (prefix[static_cast<size_t>(j)] * f.a2[static_cast<size_t>(j)] *
                    suffix[static_cast<size_t>(j) + 1])(0, 0) /
                   total;
        m1[j] = (prefix[static_cast<size_t>(j)] * f.a1[static_cast<size_t>(j)] *
                 suffix[static_cast<size_t>(j) + 1])(0, 0) /
                total;
        Eigen::RowVectorXd msg = prefix[static_cast<size_t>(j)] * f.a1[static_cast<size_t>(j)];
        for (Index k = j + 1; k < d; ++k) {
            const double v =
                (msg * f.a1[static_cast<size_t>(k)] * suffix[static_cast<size_t>(k) + 1])(0, 0) /
                total;
            m2(j, k) = v;
            m2(k, j) = v;
            msg = msg * f.a0[static_cast<size_t>(k)];
        }
    }
    if (!m.pca) return m2;

    const Eigen::MatrixXd& q = m.pca->rotation;
    const Eigen::VectorXd& c = m.pca->center;
    return q * m2 * q.transpose() + q * m1 * c.transpose() + c * (q * m1).transpose() +
           c * c.transpose();
}

Eigen::MatrixXd moment2(const SampleSet& s) {
    s.validate();
    return s.data.transpose() * s.data / static_cast<double>(s.count());
}

}  // namespace ttde
