#include "ttde/models.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ttde/errors.hpp"

namespace ttde {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::array<GmSpec::Component, 6> GmSpec::components() {
    std::array<Component, 6> c;
    size_t at = 0;
    for (size_t o = 0; o < 3; ++o)
        for (size_t i = 0; i < 2; ++i)
            c[at++] = {outer_weights[o] * inner_weights[i], means[i], sigmas[o]};
    return c;
}

SampleSet gm_sample(const GmSpec& spec, Index count, std::uint64_t seed) {
    if (count < 1) throw config_error("gm_sample: count must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SampleSet out;
    out.box = spec.box();
    out.data.resize(count, spec.d);
    const double l = spec.box_half_width;
    for (Index s = 0; s < count; ++s) {
        while (true) {
            const double uo = unif(rng);
            const double sigma = uo < GmSpec::outer_weights[0]            ? GmSpec::sigmas[0]
                                 : uo < GmSpec::outer_weights[0] + GmSpec::outer_weights[1]
                                     ? GmSpec::sigmas[1]
                                     : GmSpec::sigmas[2];
            const double mean = unif(rng) < GmSpec::inner_weights[0] ? GmSpec::means[0]
                                                                     : GmSpec::means[1];
            bool inside = true;
            for (Index j = 0; j < spec.d; ++j) {
                const double x = mean + sigma * gauss(rng);
                out.data(s, j) = x;
                if (x < -l || x > l) inside = false;
            }
            if (inside) break;
        }
    }
    out.validate();
    return out;
}

TensorTrain gm_truth_tt(const GmSpec& spec, const BasisFamily& basis) {
    if (basis.domain_lo() > -spec.box_half_width + 1e-12 ||
        basis.domain_hi() < spec.box_half_width - 1e-12)
        throw config_error("gm_truth_tt: basis domain does not cover the box");

    const Index n = basis.n;
    const auto comps = GmSpec::components();

    // Per-component coefficient vector c_t(l) = integral of phi_l against the
    // truncated, renormalized 1D Gaussian; fine midpoint quadrature.
    const Index quad_points = 50000;
    const double lo = -spec.box_half_width, hi = spec.box_half_width;
    const double h = (hi - lo) / static_cast<double>(quad_points);
    std::array<Eigen::VectorXd, 6> coeff;
    for (size_t t = 0; t < 6; ++t) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        double mass = 0.0;
        for (Index q = 0; q < quad_points; ++q) {
            const double x = lo + (static_cast<double>(q) + 0.5) * h;
            const double z = (x - comps[t].mean) / comps[t].sigma;
            const double rho = std::exp(-0.5 * z * z) /
                               (comps[t].sigma * std::sqrt(2.0 * 3.14159265358979323846));
            mass += rho * h;
            for (Index l = 1; l <= n; ++l) c[l - 1] += basis.eval(l, x) * rho * h;
        }
        coeff[t] = c / mass;  // truncation renormalization
    }

    TensorTrain t;
    if (spec.d == 1) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        for (size_t k = 0; k < 6; ++k) c += comps[k].weight * coeff[k];
        t.cores.push_back(TtCore::from_left_unfolding(1, n, c));
        return t;
    }

    TtCore first(1, n, 6);
    for (Index i = 0; i < n; ++i)
        for (Index b = 0; b < 6; ++b)
            first(0, i, b) = comps[static_cast<size_t>(b)].weight * coeff[static_cast<size_t>(b)][i];
    t.cores.push_back(std::move(first));
    for (Index j = 1; j + 1 < spec.d; ++j) {
        TtCore mid(6, n, 6);
        for (Index a = 0; a < 6; ++a)
            for (Index i = 0; i < n; ++i) mid(a, i, a) = coeff[static_cast<size_t>(a)][i];
        t.cores.push_back(std::move(mid));
    }
    TtCore last(6, n, 1);
    for (Index a = 0; a < 6; ++a)
        for (Index i = 0; i < n; ++i) last(a, i, 0) = coeff[static_cast<size_t>(a)][i];
    t.cores.push_back(std::move(last));
    return t;
}

GlSpec GlSpec::gl1d(Index d) {
    if (d < 1) throw config_error("GlSpec: d must be >= 1");
    GlSpec s;
    s.kind = Kind::gl1d;
    s.d = d;
    s.lambda = 0.03;
    s.beta = 1.0 / 8.0;
    s.box_half_width = 2.5;
    s.mesh = 0.05;
    return s;
}

GlSpec GlSpec::gl2d(Index m) {
    if (m < 1) throw config_error("GlSpec: lattice side must be >= 1");
    GlSpec s;
    s.kind = Kind::gl2d;
    s.side = m;
    s.d = m * m;
    s.lambda = 0.1;
    s.beta = 1.0;
    s.box_half_width = 2.0;
    s.mesh = 0.05;
    return s;
}

namespace {

// Lattice value with the pinned frame: rows 0 and m+1 are +1 (including
// corners), interior rows have -1 in columns 0 and m+1.
double gl2d_value(const GlSpec& spec, const Eigen::VectorXd& x, Index i, Index j) {
    const Index m = spec.side;
    if (i == 0 || i == m + 1) return 1.0;
    if (j == 0 || j == m + 1) return -1.0;
    return x[(i - 1) * m + (j - 1)];
}

}  // namespace

double gl_potential(const GlSpec& spec, const Eigen::VectorXd& x) {
    if (x.size() != spec.d) throw config_error("gl_potential: dimension mismatch");
    const double h = spec.h();
    const double inv_h2 = 1.0 / (h * h);
    double v = 0.0;
    if (spec.kind == GlSpec::Kind::gl1d) {
        auto val = [&](Index i) { return i == 0 || i == spec.d + 1 ? 0.0 : x[i - 1]; };
        for (Index i = 1; i <= spec.d + 1; ++i) {
            const double diff = val(i) - val(i - 1);
            v += 0.5 * spec.lambda * diff * diff * inv_h2;
        }
        for (Index i = 1; i <= spec.d; ++i) {
            const double q = 1.0 - x[i - 1] * x[i - 1];
            v += q * q / (4.0 * spec.lambda);
        }
    } else {
        const Index m = spec.side;
        for (Index i = 1; i <= m + 1; ++i)
            for (Index j = 1; j <= m + 1; ++j) {
                const double dv = gl2d_value(spec, x, i, j) - gl2d_value(spec, x, i - 1, j);
                const double dh = gl2d_value(spec, x, i, j) - gl2d_value(spec, x, i, j - 1);
                v += 0.5 * spec.lambda * (dv * dv + dh * dh) * inv_h2;
            }
        for (Index i = 1; i <= m; ++i)
            for (Index j = 1; j <= m; ++j) {
                const double q = 1.0 - gl2d_value(spec, x, i, j) * gl2d_value(spec, x, i, j);
                v += q * q / (4.0 * spec.lambda);
            }
    }
    return v;
}

Eigen::VectorXd gl_gradient(const GlSpec& spec, const Eigen::VectorXd& x) {
    if (x.size() != spec.d) throw config_error("gl_gradient: dimension mismatch");
    const double h = spec.h();
    const double inv_h2 = 1.0 / (h * h);
    Eigen::VectorXd g(spec.d);
    if (spec.kind == GlSpec::Kind::gl1d) {
        auto val = [&](Index i) { return i == 0 || i == spec.d + 1 ? 0.0 : x[i - 1]; };
        for (Index i = 1; i <= spec.d; ++i) {
            const double xi = x[i - 1];
            g[i - 1] = spec.lambda * inv_h2 * (2.0 * xi - val(i - 1) - val(i + 1)) -
                       (1.0 - xi * xi) * xi / spec.lambda;
        }
    } else {
        const Index m = spec.side;
        for (Index i = 1; i <= m; ++i)
            for (Index j = 1; j <= m; ++j) {
                const double xi = gl2d_value(spec, x, i, j);
                const double nb = gl2d_value(spec, x, i - 1, j) + gl2d_value(spec, x, i + 1, j) +
                                  gl2d_value(spec, x, i, j - 1) + gl2d_value(spec, x, i, j + 1);
                g[(i - 1) * m + (j - 1)] =
                    spec.lambda * inv_h2 * (4.0 * xi - nb) - (1.0 - xi * xi) * xi / spec.lambda;
            }
    }
    return g;
}

SampleSet langevin_sample(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_v,
                          double beta, const std::vector<GridSpec>& box,
                          const LangevinConfig& cfg, Index count) {
    if (count < 1) throw config_error("langevin_sample: count must be >= 1");
    if (!(beta > 0)) throw config_error("langevin_sample: beta must be positive");
    const Index d = static_cast<Index>(box.size());
    const double dt = cfg.step_or_default(beta);
    const double noise = std::sqrt(2.0 * dt);
    const Index per_chain = std::max<Index>(cfg.samples_per_chain, 1);
    const Index n_chains = (count + per_chain - 1) / per_chain;

    SampleSet out;
    out.box = box;
    out.data.resize(count, d);

    double escape = 0.0;
    for (const auto& g : box) escape = std::max(escape, 50.0 * std::max(std::abs(g.lo), g.hi));

    Index written = 0;
    for (Index chain = 0; chain < n_chains && written < count; ++chain) {
        std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(chain))));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);

        Eigen::VectorXd x(d);
        for (Index j = 0; j < d; ++j) {
            const double w = cfg.init_half_width > 0
                                 ? cfg.init_half_width
                                 : 0.5 * (box[static_cast<size_t>(j)].hi - box[static_cast<size_t>(j)].lo);
            const double mid = 0.5 * (box[static_cast<size_t>(j)].lo + box[static_cast<size_t>(j)].hi);
            x[j] = mid + w * unif(rng);
        }

        auto advance = [&](Index steps) {
            for (Index s = 0; s < steps; ++s) {
                const Eigen::VectorXd g = grad_v(x);
                for (Index j = 0; j < d; ++j) x[j] += -beta * g[j] * dt + noise * gauss(rng);
                if (x.cwiseAbs().maxCoeff() > escape)
                    throw numeric_error(
                        "langevin_sample: chain diverged; reduce the step size");
            }
        };

        advance(cfg.burn_in);
        const Index want = std::min(per_chain, count - written);
        Index got = 0;
        Index attempts = 0;
        const Index max_attempts = 1000 * per_chain;
        while (got < want) {
            advance(cfg.thinning);
            bool inside = true;
            for (Index j = 0; j < d; ++j)
                if (!box[static_cast<size_t>(j)].contains(x[j])) inside = false;
            if (inside) {
                out.data.row(written + got) = x.transpose();
                ++got;
            } else if (++attempts > max_attempts) {
                throw numeric_error("langevin_sample: chain cannot stay inside the box");
            }
        }
        written += got;
    }
    out.validate();
    return out;
}

SampleSet gl_langevin_sample(const GlSpec& spec, const LangevinConfig& cfg, Index count) {
    LangevinConfig local = cfg;
    if (local.init_half_width <= 0) local.init_half_width = 1.2;  // start in the well basin
    return langevin_sample([&spec](const Eigen::VectorXd& x) { return gl_gradient(spec, x); },
                           spec.beta, spec.box(), local, count);
}

}  // namespace ttde
