#include "ttde/metrics.hpp"

#include <cmath>

#include "ttde/density_ops.hpp"
#include "ttde/errors.hpp"

namespace ttde {

namespace {

// sum over grid cells of p(x) q(x) mesh^d through the rank space.
double grid_inner(const DensityModel& p, const GridChain& cp, const DensityModel& q,
                  const GridChain& cq) {
    const Index d = p.dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
    for (Index j = 0; j < d; ++j) {
        const GridSpec& g = p.box[static_cast<size_t>(j)];
        const auto& fp = cp.factors[static_cast<size_t>(j)];
        const auto& fq = cq.factors[static_cast<size_t>(j)];
        Eigen::MatrixXd next =
            Eigen::MatrixXd::Zero(fp[0].cols(), fq[0].cols());
        for (Index cell = 0; cell < g.points(); ++cell) {
            const double w = g.mesh * cp.mu[static_cast<size_t>(j)][cell] *
                             cq.mu[static_cast<size_t>(j)][cell];
            next.noalias() +=
                w * fp[static_cast<size_t>(cell)].transpose() * m * fq[static_cast<size_t>(cell)];
        }
        m = std::move(next);
    }
    return m(0, 0) / (p.norm_const * q.norm_const);
}

}  // namespace

double rel_l2(const DensityModel& p, const DensityModel& q) {
    p.validate();
    q.validate();
    if (p.pca || q.pca) throw config_error("rel_l2: PCA models are not comparable on a grid");
    if (p.dim() != q.dim()) throw config_error("rel_l2: dimension mismatch");
    for (Index j = 0; j < p.dim(); ++j)
        if (!(p.box[static_cast<size_t>(j)] == q.box[static_cast<size_t>(j)]))
            throw config_error("rel_l2: models must share the box and mesh");

    const GridChain cp = tabulate_chain(p);
    const GridChain cq = tabulate_chain(q);
    const double qq = grid_inner(q, cq, q, cq);
    if (!(qq > 0)) throw numeric_error("rel_l2: reference has zero norm");
    const double pp = grid_inner(p, cp, p, cp);
    const double pq = grid_inner(p, cp, q, cq);
    const double num = std::max(pp - 2.0 * pq + qq, 0.0);
    return std::sqrt(num / qq);
}

double rel_l2(const DensityModel& p, const TensorTrain& truth_coeff,
              const std::vector<BasisFamily>& truth_basis) {
    DensityModel q;
    q.coeff = truth_coeff;
    q.basis = truth_basis;
    q.mean_field = p.mean_field;
    q.box = p.box;
    q.norm_const = 1.0;
    return rel_l2(p, q);
}

double second_moment_error(const SampleSet& generated, const SampleSet& reference) {
    if (generated.dim() != reference.dim())
        throw config_error("second_moment_error: dimension mismatch");
    const Eigen::MatrixXd g = moment2(generated);
    const Eigen::MatrixXd r = moment2(reference);
    const double denom = r.norm();
    if (!(denom > 0)) throw numeric_error("second_moment_error: reference Gram is zero");
    return (g - r).norm() / denom;
}

}  // namespace ttde
