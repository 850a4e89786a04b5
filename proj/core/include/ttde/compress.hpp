#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ttde/basis.hpp"
#include "ttde/svd.hpp"
#include "ttde/tensor_train.hpp"

namespace ttde {

enum class Algo { naive, svd_fast, svd_kn, svd_c, svd_c_hier, rsvd_t };

enum class RandomLaw { gaussian, uniform };

struct CompressSpec {
    Algo algo = Algo::svd_kn;
    std::vector<Index> ranks;       // r_1 .. r_{d-1}
    Index sketch_size = 0;          // 0 selects the per-algorithm default
    Index cluster_order = 1;        // svd_c
    std::uint64_t seed = 0;
    double pinv_rel_tol = 1e-10;
    RandomLaw law = RandomLaw::gaussian;
    Index dense_cap = kDefaultDenseCap;  // naive only

    Index sketch_or_default() const {
        if (sketch_size > 0) return sketch_size;
        switch (algo) {
            case Algo::svd_kn: return 100;
            case Algo::svd_c_hier: return 10;
            case Algo::rsvd_t: return 30;
            default: return 0;
        }
    }
};

std::vector<Index> uniform_ranks(Index d, Index r);

// Multi-indices l in {1..n}^d with exactly k non-constant positions.
// Enumeration order: positions lexicographic, literals odometer (last fastest).
class ClusterIndexSet {
public:
    ClusterIndexSet(Index k, Index d, Index n);

    Index size() const { return size_; }
    Index order() const { return k_; }

    // Visits each index as a list of (position, literal) pairs, both 1-based;
    // positions are the support, literals lie in 2..n.
    void for_each_support(
        const std::function<void(const std::vector<std::pair<Index, Index>>&)>& fn) const;

    // Materialized 1-based multi-indices (small sets only).
    std::vector<std::vector<Index>> materialize() const;

private:
    Index k_, d_, n_, size_;
};

Index cluster_union_size(Index max_order, Index d, Index n);

struct NystromFactors {
    std::vector<Index> indices;  // sorted row/column subset
    Eigen::MatrixXd M;           // N x |I|, selected columns of the Gram
    Eigen::MatrixXd W;           // |I| x |I| intersection
};

// Nystrom factors of the Hadamard-product Gram over feature blocks j+1..d
// (j is 1-based; j = 0 uses the full product). Direct evaluation, test scale.
NystromFactors nystrom_of_suffix_gram(const std::vector<FeatureBlock>& blocks, Index j,
                                      const std::vector<Index>& indices);

struct RandomTTSketch {
    std::vector<TtCore> cores;  // (1,n,rt), (rt,n,rt)..., (rt,n,1)
    RandomLaw law = RandomLaw::gaussian;

    static RandomTTSketch generate(Index d, Index n, Index sketch, RandomLaw law,
                                   std::uint64_t seed);
};

// Dyadic interval tree over dimensions {1..d}, splitting ceil/floor.
struct DyadicNode {
    Index lo = 0, hi = 0;            // 1-based inclusive
    Index left = -1, right = -1;     // child node ids, -1 for leaves
    Index parent = -1;
};

struct DyadicCovTree {
    std::vector<DyadicNode> nodes;  // nodes[0] is the root

    static DyadicCovTree build(Index d);

    // Maximal tree nodes contained in the suffix {j+1..d}, ascending by lo.
    // Every returned node is the right child of its parent.
    std::vector<Index> suffix_cover(Index j) const;
};

struct TtSvdInfo {
    std::vector<double> discarded_sq;  // sum of squared discarded singular values per cut
};

// Algorithmic surface. Feature blocks are the alpha-weighted per-dimension
// matrices; every routine returns the coefficient tensor train with
// left-orthogonal cores 1..d-1.
TensorTrain tt_svd_naive(const DenseTensor& a, const std::vector<Index>& ranks,
                         double rel_singular_floor = 1e-12, TtSvdInfo* info = nullptr);

TensorTrain tt_svd_fast(const std::vector<FeatureBlock>& blocks,
                        const std::vector<Index>& ranks);

TensorTrain tt_svd_kn(const std::vector<FeatureBlock>& blocks, const std::vector<Index>& ranks,
                      Index sketch, std::uint64_t seed, double pinv_rel_tol = 1e-10);

TensorTrain tt_svd_c(const std::vector<FeatureBlock>& blocks, const std::vector<Index>& ranks,
                     Index cluster_order);

TensorTrain tt_svd_c_hier(const std::vector<FeatureBlock>& blocks,
                          const std::vector<Index>& ranks, Index sketch, std::uint64_t seed,
                          double pinv_rel_tol = 1e-10);

TensorTrain tt_rsvd_t(const std::vector<FeatureBlock>& blocks, const std::vector<Index>& ranks,
                      Index sketch, std::uint64_t seed, RandomLaw law = RandomLaw::gaussian);

// Brute-force coefficient tensor (1/N) sum_i kron of feature rows. Oracle scale.
DenseTensor dense_coefficient_tensor(const std::vector<FeatureBlock>& blocks,
                                     Index max_entries = kDefaultDenseCap);

// Dispatch on spec.algo.
TensorTrain compress(const std::vector<FeatureBlock>& blocks, const CompressSpec& spec);

}  // namespace ttde
