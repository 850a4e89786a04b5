#pragma once

#include <vector>

#include <Eigen/Core>

#include "ttde/basis.hpp"
#include "ttde/compress.hpp"
#include "ttde/density_model.hpp"
#include "ttde/grid.hpp"
#include "ttde/tensor_train.hpp"

namespace ttde {

struct SampleSet {
    Eigen::MatrixXd data;       // N x d
    std::vector<GridSpec> box;  // per dimension

    Index count() const { return data.rows(); }
    Index dim() const { return data.cols(); }

    void validate() const;
};

// alpha = sqrt(C / ((n-1) n d)), the dimension-free denoising choice.
double alpha_default(Index n, Index d, double c = 1.0);

// Rank-1 soft down-weighting: weight alpha^k for a k-cluster index.
struct SoftWeight {
    double alpha;
    Index d, n;
    double weight(const std::vector<Index>& l_one_based) const;
};

// Indicator of cluster order <= K.
struct HardWeight {
    Index order;
    Index d, n;
    double weight(const std::vector<Index>& l_one_based) const;
};

// Brute-force single entry of diag(w) Phi^T p_hat. Oracle scale.
double coeff_entry_oracle(const SampleSet& s, const std::vector<Index>& l_one_based,
                          const SoftWeight& w, const std::vector<BasisFamily>& bases);
double coeff_entry_oracle(const SampleSet& s, const std::vector<Index>& l_one_based,
                          const HardWeight& w, const std::vector<BasisFamily>& bases);

// Full coefficient tensor of the hard-threshold estimator. Oracle scale.
DenseTensor hard_project_oracle(const SampleSet& s, Index order,
                                const std::vector<BasisFamily>& bases,
                                Index max_entries = kDefaultDenseCap);

std::vector<FeatureBlock> build_feature_blocks(const SampleSet& s,
                                               const std::vector<BasisFamily>& bases,
                                               double alpha);

// Convolution + compression: the coefficient tensor train of
// diag(w_alpha) Phi^T p_hat under the requested algorithm.
TensorTrain fit(const SampleSet& s, const std::vector<BasisFamily>& bases, double alpha,
                const CompressSpec& algo);

// Undo the soft weighting: basis index l >= 2 scaled by 1/(alpha+lambda),
// l = 1 by 1/(1+lambda); attaches basis, mean-field and box.
DensityModel deconvolve(const TensorTrain& coeff, double alpha, double lambda,
                        std::vector<BasisFamily> bases, std::vector<MeanField1d> mean_field,
                        std::vector<GridSpec> box);

}  // namespace ttde
