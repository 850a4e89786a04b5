#include "ttde/estimator.hpp"

#include <cmath>
#include <string>

namespace ttde {

void SampleSet::validate() const {
    if (data.rows() < 1) throw config_error("SampleSet: at least one sample required");
    if (static_cast<Index>(box.size()) != data.cols())
        throw config_error("SampleSet: box must have one GridSpec per dimension");
    for (Index j = 0; j < data.cols(); ++j) {
        const GridSpec& g = box[static_cast<size_t>(j)];
        for (Index i = 0; i < data.rows(); ++i)
            if (!g.contains(data(i, j)))
                throw config_error("SampleSet: sample outside box in dimension " +
                                   std::to_string(j + 1));
    }
}

double alpha_default(Index n, Index d, double c) {
    if (n < 2) throw config_error("alpha_default: n must be >= 2");
    if (d < 1) throw config_error("alpha_default: d must be >= 1");
    if (!(c > 0)) throw config_error("alpha_default: C must be positive");
    return std::sqrt(c / (static_cast<double>(n - 1) * static_cast<double>(n) *
                          static_cast<double>(d)));
}

namespace {

Index cluster_order_of(const std::vector<Index>& l) {
    Index k = 0;
    for (Index v : l)
        if (v != 1) ++k;
    return k;
}

template <typename Weight>
double entry_oracle(const SampleSet& s, const std::vector<Index>& l, const Weight& w,
                    const std::vector<BasisFamily>& bases) {
    s.validate();
    const Index d = s.dim();
    if (static_cast<Index>(l.size()) != d || static_cast<Index>(bases.size()) != d)
        throw config_error("coeff_entry_oracle: dimension mismatch");
    double acc = 0.0;
    for (Index i = 0; i < s.count(); ++i) {
        double prod = 1.0;
        for (Index j = 0; j < d; ++j)
            prod *= bases[static_cast<size_t>(j)].eval(l[static_cast<size_t>(j)], s.data(i, j));
        acc += prod;
    }
    return w.weight(l) * acc / static_cast<double>(s.count());
}

}  // namespace

double SoftWeight::weight(const std::vector<Index>& l) const {
    return std::pow(alpha, static_cast<double>(cluster_order_of(l)));
}

double HardWeight::weight(const std::vector<Index>& l) const {
    return cluster_order_of(l) <= order ? 1.0 : 0.0;
}

double coeff_entry_oracle(const SampleSet& s, const std::vector<Index>& l, const SoftWeight& w,
                          const std::vector<BasisFamily>& bases) {
    return entry_oracle(s, l, w, bases);
}

double coeff_entry_oracle(const SampleSet& s, const std::vector<Index>& l, const HardWeight& w,
                          const std::vector<BasisFamily>& bases) {
    return entry_oracle(s, l, w, bases);
}

DenseTensor hard_project_oracle(const SampleSet& s, Index order,
                                const std::vector<BasisFamily>& bases, Index max_entries) {
    s.validate();
    const Index d = s.dim();
    DenseTensor out;
    Index total = 1;
    for (const auto& b : bases) {
        out.mode_sizes.push_back(b.n);
        total *= b.n;
        if (total > max_entries) throw config_error("hard_project_oracle: memory cap exceeded");
    }
    out.data = Eigen::VectorXd::Zero(total);

    const HardWeight w{order, d, bases.front().n};
    std::vector<Index> idx(static_cast<size_t>(d), 1);
    for (Index flat = 0; flat < total; ++flat) {
        Index rem = flat;
        for (Index j = d - 1; j >= 0; --j) {
            idx[static_cast<size_t>(j)] = rem % out.mode_sizes[static_cast<size_t>(j)] + 1;
            rem /= out.mode_sizes[static_cast<size_t>(j)];
        }
        if (cluster_order_of(idx) > order) continue;  // weight zero
        out.data[flat] = coeff_entry_oracle(s, idx, w, bases);
    }
    return out;
}

std::vector<FeatureBlock> build_feature_blocks(const SampleSet& s,
                                               const std::vector<BasisFamily>& bases,
                                               double alpha) {
    s.validate();
    if (static_cast<Index>(bases.size()) != s.dim())
        throw config_error("build_feature_blocks: one basis family per dimension required");
    std::vector<FeatureBlock> blocks;
    blocks.reserve(bases.size());
    for (Index j = 0; j < s.dim(); ++j)
        blocks.push_back(feature_block(s.data.col(j), bases[static_cast<size_t>(j)], alpha, j));
    return blocks;
}

TensorTrain fit(const SampleSet& s, const std::vector<BasisFamily>& bases, double alpha,
                const CompressSpec& algo) {
    return compress(build_feature_blocks(s, bases, alpha), algo);
}

DensityModel deconvolve(const TensorTrain& coeff, double alpha, double lambda,
                        std::vector<BasisFamily> bases, std::vector<MeanField1d> mean_field,
                        std::vector<GridSpec> box) {
    coeff.validate();
    if (!(alpha > 0)) throw config_error("deconvolve: alpha must be positive");
    if (lambda < 0) throw config_error("deconvolve: lambda must be nonnegative");
    const Index d = coeff.order();
    if (static_cast<Index>(bases.size()) != d || static_cast<Index>(mean_field.size()) != d ||
        static_cast<Index>(box.size()) != d)
        throw config_error("deconvolve: per-dimension metadata does not match coefficient order");

    const double inv_const = 1.0 / (1.0 + lambda);
    const double inv_rest = 1.0 / (alpha + lambda);

    DensityModel m;
    m.alpha = alpha;
    m.lambda = lambda;
    m.basis = std::move(bases);
    m.mean_field = std::move(mean_field);
    m.box = std::move(box);
    m.coeff.cores.reserve(static_cast<size_t>(d));
    for (Index j = 0; j < d; ++j) {
        const TtCore& src = coeff.cores[static_cast<size_t>(j)];
        TtCore dst(src.left_rank(), src.mode_size(), src.right_rank());
        for (Index a = 0; a < src.left_rank(); ++a)
            for (Index i = 0; i < src.mode_size(); ++i)
                for (Index b = 0; b < src.right_rank(); ++b)
                    dst(a, i, b) = src(a, i, b) * (i == 0 ? inv_const : inv_rest);
        m.coeff.cores.push_back(std::move(dst));
    }
    m.validate();
    return m;
}

}  // namespace ttde
