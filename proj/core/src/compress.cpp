#include "ttde/compress.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include <Eigen/Dense>

#include "ttde/errors.hpp"

namespace ttde {

std::vector<Index> uniform_ranks(Index d, Index r) {
    if (d < 1) throw config_error("uniform_ranks: d must be >= 1");
    return std::vector<Index>(static_cast<size_t>(std::max<Index>(d - 1, 0)), r);
}

namespace {

constexpr Index kBlock = 4096;

Index block_count(Index n_samples) { return (n_samples + kBlock - 1) / kBlock; }

// Splits the sample range across threads; workers write disjoint row ranges,
// so results are bitwise identical for any thread count.
void parallel_over_samples(Index n_samples, const std::function<void(Index, Index)>& fn) {
    const Index hw = static_cast<Index>(std::max(1u, std::thread::hardware_concurrency()));
    const Index n_threads = std::min<Index>(hw, (n_samples + kBlock - 1) / kBlock);
    if (n_threads <= 1) {
        fn(0, n_samples);
        return;
    }
    const Index chunk = (n_samples + n_threads - 1) / n_threads;
    std::vector<std::thread> pool;
    for (Index t = 0; t < n_threads; ++t) {
        const Index i0 = t * chunk;
        if (i0 >= n_samples) break;
        pool.emplace_back(fn, i0, std::min(chunk, n_samples - i0));
    }
    for (auto& th : pool) th.join();
}

void validate_blocks(const std::vector<FeatureBlock>& blocks) {
    if (blocks.empty()) throw config_error("compress: no feature blocks");
    const Index n_samples = blocks.front().matrix.rows();
    if (n_samples < 1) throw config_error("compress: empty sample set");
    for (const auto& b : blocks)
        if (b.matrix.rows() != n_samples)
            throw config_error("compress: inconsistent sample counts across feature blocks");
}

// Upper bound for the rank at cut j: min(n_j r_{j-1}, product of suffix modes),
// with the product saturated to avoid overflow.
void validate_ranks(const std::vector<FeatureBlock>& blocks, const std::vector<Index>& ranks) {
    const Index d = static_cast<Index>(blocks.size());
    if (static_cast<Index>(ranks.size()) != d - 1)
        throw config_error("compress: ranks must have length d-1");
    Index r_prev = 1;
    for (Index j = 0; j + 1 < d; ++j) {
        const Index r = ranks[j];
        if (r < 1) throw config_error("compress: ranks must be >= 1");
        Index suffix = 1;
        for (Index m = j + 1; m < d; ++m) {
            suffix *= blocks[m].matrix.cols();
            if (suffix > (Index(1) << 40)) break;
        }
        const Index cap = std::min(blocks[j].matrix.cols() * r_prev, suffix);
        if (r > cap)
            throw config_error("compress: rank " + std::to_string(r) + " at cut " +
                               std::to_string(j + 1) + " exceeds available dimension " +
                               std::to_string(cap));
        r_prev = r;
    }
}

// Running left contractions u_j^(i) = G_{1:j}^T (phi_1^(i) kron ... kron phi_j^(i)),
// one column per sample. The per-dimension matrix D_j has columns
// u_{j-1}^(i) kron phi_j^(i) and is materialized block by block.
class LeftMessages {
public:
    explicit LeftMessages(Index n_samples) : u_(Eigen::MatrixXd::Ones(1, n_samples)) {}

    Index rank() const { return u_.rows(); }
    Index count() const { return u_.cols(); }

    Eigen::MatrixXd d_block(const Eigen::MatrixXd& phi, Index i0, Index len) const {
        const Index r = u_.rows();
        const Index n = phi.cols();
        Eigen::MatrixXd d(r * n, len);
        for (Index a = 0; a < r; ++a)
            for (Index l = 0; l < n; ++l)
                d.row(a * n + l) = u_.row(a).segment(i0, len).cwiseProduct(
                    phi.col(l).segment(i0, len).transpose());
        return d;
    }

    void advance(const TtCore& core, const Eigen::MatrixXd& phi) {
        const Index n_samples = u_.cols();
        Eigen::MatrixXd next(core.right_rank(), n_samples);
        for (Index b = 0; b < block_count(n_samples); ++b) {
            const Index i0 = b * kBlock;
            const Index len = std::min(kBlock, n_samples - i0);
            next.middleCols(i0, len).noalias() =
                core.left_unfolding().transpose() * d_block(phi, i0, len);
        }
        u_ = std::move(next);
    }

private:
    Eigen::MatrixXd u_;
};

TtCore final_core(const LeftMessages& msgs, const Eigen::MatrixXd& phi_last) {
    const Index n_samples = msgs.count();
    const Index r = msgs.rank();
    const Index n = phi_last.cols();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(r * n);
    for (Index b = 0; b < block_count(n_samples); ++b) {
        const Index i0 = b * kBlock;
        const Index len = std::min(kBlock, n_samples - i0);
        mean += msgs.d_block(phi_last, i0, len).rowwise().sum();
    }
    mean /= static_cast<double>(n_samples);
    return TtCore::from_left_unfolding(r, n, mean);
}

TtCore core_from_vectors(Index r_prev, Index n, const Eigen::MatrixXd& vectors) {
    return TtCore::from_left_unfolding(r_prev, n, vectors);
}

std::vector<Index> sample_without_replacement(Index n, Index k, std::mt19937_64& rng) {
    std::vector<Index> idx(n);
    for (Index i = 0; i < n; ++i) idx[i] = i;
    for (Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Index>& rows) {
    Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
    for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Cluster index enumeration
// ---------------------------------------------------------------------------

ClusterIndexSet::ClusterIndexSet(Index k, Index d, Index n) : k_(k), d_(d), n_(n) {
    if (k < 0 || k > d) throw config_error("ClusterIndexSet: order out of range");
    if (n < 1) throw config_error("ClusterIndexSet: n must be >= 1");
    if (k > 0 && n < 2) {
        size_ = 0;
        return;
    }
    double s = 1.0;
    for (Index i = 0; i < k; ++i) s *= static_cast<double>(d - i) / static_cast<double>(i + 1);
    for (Index i = 0; i < k; ++i) s *= static_cast<double>(n - 1);
    size_ = static_cast<Index>(std::llround(s));
}

void ClusterIndexSet::for_each_support(
    const std::function<void(const std::vector<std::pair<Index, Index>>&)>& fn) const {
    std::vector<std::pair<Index, Index>> support(static_cast<size_t>(k_));
    if (k_ == 0) {
        fn(support);
        return;
    }
    if (size_ == 0) return;

    std::vector<Index> pos(static_cast<size_t>(k_));
    for (Index i = 0; i < k_; ++i) pos[i] = i + 1;  // 1-based positions

    auto emit_literals = [&]() {
        std::vector<Index> lit(static_cast<size_t>(k_), 2);
        while (true) {
            for (Index i = 0; i < k_; ++i) support[i] = {pos[i], lit[i]};
            fn(support);
            Index c = k_ - 1;
            while (c >= 0 && lit[c] == n_) {
                lit[c] = 2;
                --c;
            }
            if (c < 0) break;
            ++lit[c];
        }
    };

    // Lexicographic combinations of positions.
    while (true) {
        emit_literals();
        Index c = k_ - 1;
        while (c >= 0 && pos[c] == d_ - (k_ - 1 - c)) --c;
        if (c < 0) break;
        ++pos[c];
        for (Index i = c + 1; i < k_; ++i) pos[i] = pos[i - 1] + 1;
    }
}

std::vector<std::vector<Index>> ClusterIndexSet::materialize() const {
    std::vector<std::vector<Index>> out;
    out.reserve(static_cast<size_t>(size_));
    for_each_support([&](const std::vector<std::pair<Index, Index>>& support) {
        std::vector<Index> idx(static_cast<size_t>(d_), 1);
        for (const auto& [p, l] : support) idx[p - 1] = l;
        out.push_back(std::move(idx));
    });
    return out;
}

Index cluster_union_size(Index max_order, Index d, Index n) {
    Index total = 0;
    for (Index k = 0; k <= std::min(max_order, d); ++k) total += ClusterIndexSet(k, d, n).size();
    return total;
}

// ---------------------------------------------------------------------------
// Dense oracle and TT-SVD
// ---------------------------------------------------------------------------

DenseTensor dense_coefficient_tensor(const std::vector<FeatureBlock>& blocks, Index max_entries) {
    validate_blocks(blocks);
    const Index d = static_cast<Index>(blocks.size());
    const Index n_samples = blocks.front().matrix.rows();
    Index total = 1;
    for (const auto& b : blocks) {
        total *= b.matrix.cols();
        if (total > max_entries)
            throw config_error("dense_coefficient_tensor: memory cap exceeded");
    }

    DenseTensor out;
    for (const auto& b : blocks) out.mode_sizes.push_back(b.matrix.cols());
    out.data = Eigen::VectorXd::Zero(total);
    for (Index i = 0; i < n_samples; ++i) {
        Eigen::VectorXd acc = Eigen::VectorXd::Ones(1);
        for (Index j = 0; j < d; ++j) {
            const auto row = blocks[j].matrix.row(i);
            Eigen::VectorXd next(acc.size() * row.size());
            for (Index a = 0; a < acc.size(); ++a)
                next.segment(a * row.size(), row.size()) = acc[a] * row.transpose();
            acc = std::move(next);
        }
        out.data += acc;
    }
    out.data /= static_cast<double>(n_samples);
    return out;
}

TensorTrain tt_svd_naive(const DenseTensor& a, const std::vector<Index>& ranks,
                         double rel_singular_floor, TtSvdInfo* info) {
    a.validate();
    const Index d = static_cast<Index>(a.mode_sizes.size());
    if (static_cast<Index>(ranks.size()) != d - 1)
        throw config_error("tt_svd_naive: ranks must have length d-1");
    if (info) info->discarded_sq.assign(static_cast<size_t>(std::max<Index>(d - 1, 0)), 0.0);

    TensorTrain t;
    if (d == 1) {
        t.cores.push_back(TtCore::from_left_unfolding(1, a.mode_sizes[0], a.data));
        return t;
    }

    Eigen::MatrixXd b = unfold(a, 1);  // n_1 x suffix
    Index r_prev = 1;
    for (Index j = 0; j + 1 < d; ++j) {
        const Index n = a.mode_sizes[j];
        const Index r = ranks[j];
        if (r > std::min(b.rows(), b.cols()))
            throw config_error("tt_svd_naive: rank exceeds matrix dimension at cut " +
                               std::to_string(j + 1));
        SvdConvention conv;
        conv.truncation_rank = r;
        conv.rel_singular_floor = rel_singular_floor;
        const TruncatedSvd svd = truncated_svd(b, conv);
        if (info) {
            Eigen::JacobiSVD<Eigen::MatrixXd> full(b);
            double disc = 0;
            for (Index k = r; k < full.singularValues().size(); ++k)
                disc += full.singularValues()[k] * full.singularValues()[k];
            info->discarded_sq[static_cast<size_t>(j)] = disc;
        }
        t.cores.push_back(core_from_vectors(r_prev, n, svd.U));

        // B_{j+1}: fold the next mode out of the columns of U^T B.
        const Eigen::MatrixXd projected = svd.U.transpose() * b;  // r x suffix
        const Index n_next = a.mode_sizes[j + 1];
        const Index cols_next = projected.cols() / n_next;
        Eigen::MatrixXd next(r * n_next, cols_next);
        for (Index row = 0; row < r; ++row)
            for (Index i = 0; i < n_next; ++i)
                next.row(row * n_next + i) =
                    projected.row(row).segment(i * cols_next, cols_next);
        b = std::move(next);
        r_prev = r;
    }
    t.cores.push_back(TtCore::from_left_unfolding(r_prev, a.mode_sizes[d - 1], b));
    return t;
}

// ---------------------------------------------------------------------------
// Fast exact TT-SVD on feature blocks
// ---------------------------------------------------------------------------

TensorTrain tt_svd_fast(const std::vector<FeatureBlock>& blocks,
                        const std::vector<Index>& ranks) {
    validate_blocks(blocks);
    validate_ranks(blocks, ranks);
    const Index d = static_cast<Index>(blocks.size());
    const Index n_samples = blocks.front().matrix.rows();
    const double inv_n2 = 1.0 / (static_cast<double>(n_samples) * static_cast<double>(n_samples));

    TensorTrain t;
    LeftMessages msgs(n_samples);
    for (Index j = 0; j + 1 < d; ++j) {
        const Eigen::MatrixXd& phi = blocks[j].matrix;
        const Index n = phi.cols();
        const Index rows = msgs.rank() * n;

        // A_j = (1/N^2) D_j E_j D_j^T with E_j the Hadamard product of the
        // suffix Grams; assembled over sample-block pairs so E_j is never
        // materialized in full.
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, rows);
        const Index nb = block_count(n_samples);
        for (Index bi = 0; bi < nb; ++bi) {
            const Index i0 = bi * kBlock;
            const Index li = std::min(kBlock, n_samples - i0);
            const Eigen::MatrixXd di = msgs.d_block(phi, i0, li);
            for (Index bj = bi; bj < nb; ++bj) {
                const Index j0 = bj * kBlock;
                const Index lj = std::min(kBlock, n_samples - j0);
                Eigen::MatrixXd e = Eigen::MatrixXd::Ones(li, lj);
                for (Index m = j + 1; m < d; ++m) {
                    const Eigen::MatrixXd& pm = blocks[m].matrix;
                    e.array() *= (pm.middleRows(i0, li) * pm.middleRows(j0, lj).transpose()).array();
                }
                const Eigen::MatrixXd dj = bj == bi ? di : msgs.d_block(phi, j0, lj);
                const Eigen::MatrixXd contrib = di * e * dj.transpose();
                a += contrib;
                if (bj != bi) a += contrib.transpose();
            }
        }
        a *= inv_n2;

        const SymEig eig = sym_eig_top(a, ranks[j]);
        TtCore core = core_from_vectors(msgs.rank(), n, eig.U);
        msgs.advance(core, phi);
        t.cores.push_back(std::move(core));
    }
    t.cores.push_back(final_core(msgs, blocks[d - 1].matrix));
    return t;
}

// ---------------------------------------------------------------------------
// TT-SVD-kn
// ---------------------------------------------------------------------------

NystromFactors nystrom_of_suffix_gram(const std::vector<FeatureBlock>& blocks, Index j,
                                      const std::vector<Index>& indices) {
    validate_blocks(blocks);
    const Index d = static_cast<Index>(blocks.size());
    const Index n_samples = blocks.front().matrix.rows();
    const Index rt = static_cast<Index>(indices.size());
    NystromFactors f;
    f.indices = indices;
    f.M = Eigen::MatrixXd::Ones(n_samples, rt);
    f.W = Eigen::MatrixXd::Ones(rt, rt);
    for (Index m = j; m < d; ++m) {
        const Eigen::MatrixXd& pm = blocks[m].matrix;
        const Eigen::MatrixXd pmi = select_rows(pm, indices);
        f.M.array() *= (pm * pmi.transpose()).array();
        f.W.array() *= (pmi * pmi.transpose()).array();
    }
    return f;
}

TensorTrain tt_svd_kn(const std::vector<FeatureBlock>& blocks, const std::vector<Index>& ranks,
                      Index sketch, std::uint64_t seed, double pinv_rel_tol) {
    validate_blocks(blocks);
    validate_ranks(blocks, ranks);
    const Index d = static_cast<Index>(blocks.size());
    const Index n_samples = blocks.front().matrix.rows();
    if (sketch > n_samples) throw config_error("tt_svd_kn: sketch size exceeds sample count");
    if (sketch < 1) throw config_error("tt_svd_kn: sketch size must be >= 1");
    for (Index r : ranks)
        if (sketch < r) throw config_error("tt_svd_kn: sketch size below target rank");
    const double inv_n2 = 1.0 / (static_cast<double>(n_samples) * static_cast<double>(n_samples));

    std::mt19937_64 rng(seed);
    const std::vector<Index> idx = sample_without_replacement(n_samples, sketch, rng);

    // Same index set for every cut; factors precomputed by the suffix
    // recursion from the right, sample rows in parallel.
    std::vector<Eigen::MatrixXd> m_fac(static_cast<size_t>(d - 1));
    std::vector<Eigen::MatrixXd> w_fac(static_cast<size_t>(d - 1));
    std::vector<Eigen::MatrixXd> pmi(static_cast<size_t>(d - 1));
    for (Index j = d - 2; j >= 0; --j)
        pmi[static_cast<size_t>(j)] = select_rows(blocks[j + 1].matrix, idx);
    {
        Eigen::MatrixXd w_run = Eigen::MatrixXd::Ones(sketch, sketch);
        for (Index j = d - 2; j >= 0; --j) {
            const Eigen::MatrixXd& pi = pmi[static_cast<size_t>(j)];
            w_run.array() *= (pi * pi.transpose()).array();
            w_fac[static_cast<size_t>(j)] = w_run;
            m_fac[static_cast<size_t>(j)].resize(n_samples, sketch);
        }
        parallel_over_samples(n_samples, [&](Index i0, Index len) {
            Eigen::MatrixXd run = Eigen::MatrixXd::Ones(len, sketch);
            for (Index j = d - 2; j >= 0; --j) {
                run.array() *= (blocks[j + 1].matrix.middleRows(i0, len) *
                                pmi[static_cast<size_t>(j)].transpose())
                                   .array();
                m_fac[static_cast<size_t>(j)].middleRows(i0, len) = run;
            }
        });
    }

    TensorTrain t;
    LeftMessages msgs(n_samples);
    for (Index j = 0; j + 1 < d; ++j) {
        const Eigen::MatrixXd& phi = blocks[j].matrix;
        const Index n = phi.cols();
        const Eigen::MatrixXd& mj = m_fac[static_cast<size_t>(j)];

        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(msgs.rank() * n, sketch);
        for (Index b = 0; b < block_count(n_samples); ++b) {
            const Index i0 = b * kBlock;
            const Index len = std::min(kBlock, n_samples - i0);
            y.noalias() += msgs.d_block(phi, i0, len) * mj.middleRows(i0, len);
        }

        const Eigen::MatrixXd w_pinv = sym_pinv(w_fac[static_cast<size_t>(j)], pinv_rel_tol);
        const Eigen::MatrixXd a = inv_n2 * (y * w_pinv * y.transpose());

        const SymEig eig = sym_eig_top(a, ranks[j]);
        TtCore core = core_from_vectors(msgs.rank(), n, eig.U);
        msgs.advance(core, phi);
        t.cores.push_back(std::move(core));
    }
    t.cores.push_back(final_core(msgs, blocks[d - 1].matrix));
    return t;
}

// ---------------------------------------------------------------------------
// TT-SVD-c: truncated cluster basis sketching
// ---------------------------------------------------------------------------

namespace {

// E_j rows indexed by cluster indices of the suffix; entry = product of the
// feature values on the support (constant positions contribute 1).
Eigen::MatrixXd cluster_sketch_rows(const std::vector<FeatureBlock>& blocks, Index j,
                                    Index cluster_order, Index i0, Index len) {
    const Index d = static_cast<Index>(blocks.size());
    const Index suffix = d - 1 - j;
    const Index n = blocks.back().matrix.cols();
    const Index rows = cluster_union_size(cluster_order, suffix, n);
    Eigen::MatrixXd e(rows, len);
    Index row = 0;
    for (Index k = 0; k <= std::min(cluster_order, suffix); ++k) {
        ClusterIndexSet set(k, suffix, n);
        set.for_each_support([&](const std::vector<std::pair<Index, Index>>& support) {
            Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(len);
            for (const auto& [pos, lit] : support) {
                const Eigen::MatrixXd& pm = blocks[j + pos].matrix;
                v = v.cwiseProduct(pm.col(lit - 1).segment(i0, len).transpose());
            }
            e.row(row++) = v;
        });
    }
    return e;
}

}  // namespace

TensorTrain tt_svd_c(const std::vector<FeatureBlock>& blocks, const std::vector<Index>& ranks,
                     Index cluster_order) {
    validate_blocks(blocks);
    validate_ranks(blocks, ranks);
    if (cluster_order < 0) throw config_error("tt_svd_c: cluster order must be >= 0");
    const Index d = static_cast<Index>(blocks.size());
    const Index n_samples = blocks.front().matrix.rows();
    const double inv_n = 1.0 / static_cast<double>(n_samples);

    TensorTrain t;
    LeftMessages msgs(n_samples);
    for (Index j = 0; j + 1 < d; ++j) {
        const Eigen::MatrixXd& phi = blocks[j].matrix;
        const Index n = phi.cols();
        const Index suffix = d - 1 - j;
        const Index rt = cluster_union_size(cluster_order, suffix, blocks.back().matrix.cols());
        if (rt < ranks[j])
            throw config_error("tt_svd_c: sketch (" + std::to_string(rt) +
                               " cluster indices) is thinner than rank " +
                               std::to_string(ranks[j]) + " at cut " + std::to_string(j + 1));

        Eigen::MatrixXd bp = Eigen::MatrixXd::Zero(msgs.rank() * n, rt);
        for (Index b = 0; b < block_count(n_samples); ++b) {
            const Index i0 = b * kBlock;
            const Index len = std::min(kBlock, n_samples - i0);
            const Eigen::MatrixXd e = cluster_sketch_rows(blocks, j, cluster_order, i0, len);
            bp.noalias() += msgs.d_block(phi, i0, len) * e.transpose();
        }
        bp *= inv_n;

        SvdConvention conv;
        conv.truncation_rank = ranks[j];
        const TruncatedSvd svd = truncated_svd(bp, conv);
        TtCore core = core_from_vectors(msgs.rank(), n, svd.U);
        msgs.advance(core, phi);
        t.cores.push_back(std::move(core));
    }
    t.cores.push_back(final_core(msgs, blocks[d - 1].matrix));
    return t;
}

// ---------------------------------------------------------------------------
// Hierarchical acceleration of TT-SVD-c (cluster order 1)
// ---------------------------------------------------------------------------

DyadicCovTree DyadicCovTree::build(Index d) {
    if (d < 2) throw config_error("DyadicCovTree: d must be >= 2");
    DyadicCovTree tree;
    tree.nodes.push_back({1, d, -1, -1, -1});
    for (size_t v = 0; v < tree.nodes.size(); ++v) {
        const Index lo = tree.nodes[v].lo;
        const Index hi = tree.nodes[v].hi;
        if (hi == lo) continue;
        const Index mid = lo + (hi - lo + 1 + 1) / 2 - 1;  // ceil(len/2) on the left
        const Index left_id = static_cast<Index>(tree.nodes.size());
        tree.nodes.push_back({lo, mid, -1, -1, static_cast<Index>(v)});
        const Index right_id = static_cast<Index>(tree.nodes.size());
        tree.nodes.push_back({mid + 1, hi, -1, -1, static_cast<Index>(v)});
        tree.nodes[v].left = left_id;
        tree.nodes[v].right = right_id;
    }
    return tree;
}

std::vector<Index> DyadicCovTree::suffix_cover(Index j) const {
    const Index d = nodes[0].hi;
    if (j < 1 || j > d - 1) throw config_error("DyadicCovTree: suffix start out of range");
    std::vector<Index> cover;
    std::vector<Index> stack{0};
    while (!stack.empty()) {
        const Index v = stack.back();
        stack.pop_back();
        const DyadicNode& node = nodes[static_cast<size_t>(v)];
        if (node.lo > j) {
            cover.push_back(v);
            continue;
        }
        if (node.hi <= j) continue;
        stack.push_back(node.left);
        stack.push_back(node.right);
    }
    std::sort(cover.begin(), cover.end(), [&](Index a, Index b) {
        return nodes[static_cast<size_t>(a)].lo < nodes[static_cast<size_t>(b)].lo;
    });
    return cover;
}

namespace {

// Top right singular vectors of the covariance block between sibling variable
// groups, estimated from a row/column cross approximation.
Eigen::MatrixXd block_right_vectors(const std::vector<FeatureBlock>& blocks, Index s_lo,
                                    Index s_hi, Index t_lo, Index t_hi, Index sketch,
                                    double pinv_rel_tol, std::mt19937_64& rng) {
    const Index n_samples = blocks.front().matrix.rows();
    const double inv_n = 1.0 / static_cast<double>(n_samples);
    const Index n = blocks.front().matrix.cols();
    const Index rows = n * (s_hi - s_lo + 1);
    const Index cols = n * (t_hi - t_lo + 1);
    const Index n_r = std::min(sketch, rows);
    const Index n_c = std::min(sketch, cols);
    const std::vector<Index> row_idx = sample_without_replacement(rows, n_r, rng);
    const std::vector<Index> col_idx = sample_without_replacement(cols, n_c, rng);

    auto column_of = [&](Index flat, Index lo) {
        const Index dim = lo - 1 + flat / n;  // 0-based dimension
        const Index lit = flat % n;
        return blocks[dim].matrix.col(lit);
    };

    // Sampled rows against all columns, and all rows against sampled columns.
    Eigen::MatrixXd g_rows(n_samples, n_r), g_cols(n_samples, n_c);
    for (Index k = 0; k < n_r; ++k) g_rows.col(k) = column_of(row_idx[k], s_lo);
    for (Index k = 0; k < n_c; ++k) g_cols.col(k) = column_of(col_idx[k], t_lo);

    Eigen::MatrixXd m_r(n_r, cols);  // M(R, :)
    for (Index t = t_lo; t <= t_hi; ++t)
        m_r.middleCols((t - t_lo) * n, n).noalias() =
            inv_n * (g_rows.transpose() * blocks[t - 1].matrix);
    Eigen::MatrixXd m_c(rows, n_c);  // M(:, C)
    for (Index s = s_lo; s <= s_hi; ++s)
        m_c.middleRows((s - s_lo) * n, n).noalias() =
            inv_n * (blocks[s - 1].matrix.transpose() * g_cols);

    Eigen::MatrixXd w(n_r, n_c);
    for (Index k = 0; k < n_c; ++k) w.col(k) = m_r.col(col_idx[k]);

    // Pseudo-inverse of the cross block.
    Eigen::JacobiSVD<Eigen::MatrixXd> wsvd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = wsvd.singularValues().size() ? wsvd.singularValues()[0] : 0.0;
    Eigen::VectorXd inv = wsvd.singularValues();
    for (Index i = 0; i < inv.size(); ++i)
        inv[i] = smax > 0 && inv[i] > pinv_rel_tol * smax ? 1.0 / inv[i] : 0.0;
    const Eigen::MatrixXd f = m_c * (wsvd.matrixV() * inv.asDiagonal() * wsvd.matrixU().transpose());

    // Right singular vectors of F * M(R,:) without forming the tall product.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(f);
    const Eigen::MatrixXd rf =
        qr.matrixQR().topRows(std::min(f.rows(), f.cols())).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rf * m_r, Eigen::ComputeThinV);
    const Index keep = std::min<Index>(sketch, svd.matrixV().cols());
    Eigen::MatrixXd v = svd.matrixV().leftCols(keep);
    fix_signs(v);
    return v;
}

}  // namespace

TensorTrain tt_svd_c_hier(const std::vector<FeatureBlock>& blocks,
                          const std::vector<Index>& ranks, Index sketch, std::uint64_t seed,
                          double pinv_rel_tol) {
    validate_blocks(blocks);
    validate_ranks(blocks, ranks);
    const Index d = static_cast<Index>(blocks.size());
    if (d < 2) throw config_error("tt_svd_c_hier: d must be >= 2");
    if (sketch < 1) throw config_error("tt_svd_c_hier: sketch size must be >= 1");
    const Index n_samples = blocks.front().matrix.rows();
    const double inv_n = 1.0 / static_cast<double>(n_samples);

    const DyadicCovTree tree = DyadicCovTree::build(d);

    // For every internal node, summarize the sibling block and fold the
    // summary into sample space: T_v = [Phi_m]_{m in right(v)} V'_v. The same
    // T_v serves every cut whose cover contains the right child.
    std::vector<Eigen::MatrixXd> t_of_node(tree.nodes.size());
    for (size_t v = 0; v < tree.nodes.size(); ++v) {
        const DyadicNode& node = tree.nodes[v];
        if (node.left < 0) continue;
        const DyadicNode& ls = tree.nodes[static_cast<size_t>(node.left)];
        const DyadicNode& rs = tree.nodes[static_cast<size_t>(node.right)];
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(v + 1));
        const Eigen::MatrixXd vprime = block_right_vectors(
            blocks, ls.lo, ls.hi, rs.lo, rs.hi, sketch, pinv_rel_tol, rng);
        const Index n = blocks.front().matrix.cols();
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n_samples, vprime.cols());
        for (Index m = rs.lo; m <= rs.hi; ++m)
            t.noalias() += blocks[m - 1].matrix * vprime.middleRows((m - rs.lo) * n, n);
        t_of_node[static_cast<size_t>(node.right)] = std::move(t);
    }

    TensorTrain t;
    LeftMessages msgs(n_samples);
    for (Index j = 0; j + 1 < d; ++j) {
        const Eigen::MatrixXd& phi = blocks[j].matrix;
        const Index n = phi.cols();
        const std::vector<Index> cover = tree.suffix_cover(j + 1);

        Index total_cols = 0;
        for (Index v : cover) total_cols += t_of_node[static_cast<size_t>(v)].cols();
        if (total_cols < ranks[j])
            throw config_error("tt_svd_c_hier: sketch is thinner than rank at cut " +
                               std::to_string(j + 1));

        Eigen::MatrixXd sk(n_samples, total_cols);
        Index at = 0;
        for (Index v : cover) {
            const Eigen::MatrixXd& tv = t_of_node[static_cast<size_t>(v)];
            sk.middleCols(at, tv.cols()) = tv;
            at += tv.cols();
        }

        Eigen::MatrixXd bp = Eigen::MatrixXd::Zero(msgs.rank() * n, total_cols);
        for (Index b = 0; b < block_count(n_samples); ++b) {
            const Index i0 = b * kBlock;
            const Index len = std::min(kBlock, n_samples - i0);
            bp.noalias() += msgs.d_block(phi, i0, len) * sk.middleRows(i0, len);
        }
        bp *= inv_n;

        SvdConvention conv;
        conv.truncation_rank = ranks[j];
        const TruncatedSvd svd = truncated_svd(bp, conv);
        TtCore core = core_from_vectors(msgs.rank(), n, svd.U);
        msgs.advance(core, phi);
        t.cores.push_back(std::move(core));
    }
    t.cores.push_back(final_core(msgs, blocks[d - 1].matrix));
    return t;
}

// ---------------------------------------------------------------------------
// TT-rSVD-t: random tensor-train sketching
// ---------------------------------------------------------------------------

RandomTTSketch RandomTTSketch::generate(Index d, Index n, Index sketch, RandomLaw law,
                                        std::uint64_t seed) {
    if (d < 2) throw config_error("RandomTTSketch: d must be >= 2");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto draw = [&]() { return law == RandomLaw::gaussian ? gauss(rng) : unif(rng); };

    auto fill = [&](Index r_prev, Index r_next) {
        Eigen::MatrixXd m(r_prev * n, r_next);
        for (Index i = 0; i < m.rows(); ++i)
            for (Index c = 0; c < m.cols(); ++c) m(i, c) = draw();
        return m;
    };

    RandomTTSketch s;
    s.law = law;
    s.cores.push_back(TtCore::from_left_unfolding(1, n, fill(1, sketch)));
    for (Index j = 1; j + 1 < d; ++j)
        s.cores.push_back(TtCore::from_left_unfolding(sketch, n, fill(sketch, sketch)));
    s.cores.push_back(TtCore::from_left_unfolding(sketch, n, fill(sketch, 1)));
    return s;
}

TensorTrain tt_rsvd_t(const std::vector<FeatureBlock>& blocks, const std::vector<Index>& ranks,
                      Index sketch, std::uint64_t seed, RandomLaw law) {
    validate_blocks(blocks);
    validate_ranks(blocks, ranks);
    const Index d = static_cast<Index>(blocks.size());
    if (d < 2) throw config_error("tt_rsvd_t: d must be >= 2");
    if (sketch < 1) throw config_error("tt_rsvd_t: sketch size must be >= 1");
    for (Index r : ranks)
        if (sketch < r) throw config_error("tt_rsvd_t: sketch size below target rank");
    const Index n_samples = blocks.front().matrix.rows();
    const Index n = blocks.front().matrix.cols();
    for (const auto& b : blocks)
        if (b.matrix.cols() != n)
            throw config_error("tt_rsvd_t: mode sizes must be uniform");
    const double inv_n = 1.0 / static_cast<double>(n_samples);

    const RandomTTSketch h = RandomTTSketch::generate(d, n, sketch, law, seed);

    // Suffix contractions E_j = H_{j+1:d} applied to each sample's features,
    // kept in samples-by-sketch layout. Each step scales E_{j+1} columnwise
    // by the feature columns and applies the reshaped core as one GEMM;
    // samples are processed in blocks so the scaled copies stay in cache.
    std::vector<Eigen::MatrixXd> esk(static_cast<size_t>(d - 1));
    {
        std::vector<Eigen::MatrixXd> hmat(static_cast<size_t>(std::max<Index>(d - 2, 0)));
        for (Index j = 0; j + 2 < d; ++j) {
            const TtCore& hj = h.cores[static_cast<size_t>(j + 1)];
            Eigen::MatrixXd m(n * sketch, sketch);  // H reshaped, rows (m, s)
            for (Index mm = 0; mm < n; ++mm)
                m.middleRows(mm * sketch, sketch) = hj.slice(mm).transpose();
            hmat[static_cast<size_t>(j)] = std::move(m);
        }
        Eigen::MatrixXd hd(sketch, n);
        for (Index m = 0; m < n; ++m) hd.col(m) = h.cores[static_cast<size_t>(d - 1)].slice(m);

        for (Index j = 0; j + 1 < d; ++j)
            esk[static_cast<size_t>(j)].resize(n_samples, sketch);
        parallel_over_samples(n_samples, [&](Index w0, Index wlen) {
            const Index eblock = 2048;
            Eigen::MatrixXd stacked(eblock, n * sketch);
            for (Index b0 = w0; b0 < w0 + wlen; b0 += eblock) {
                const Index len = std::min(eblock, w0 + wlen - b0);
                Eigen::MatrixXd run =
                    blocks[static_cast<size_t>(d - 1)].matrix.middleRows(b0, len) *
                    hd.transpose();
                esk[static_cast<size_t>(d - 2)].middleRows(b0, len) = run;
                for (Index j = d - 3; j >= 0; --j) {
                    const Eigen::MatrixXd& pm = blocks[static_cast<size_t>(j + 1)].matrix;
                    for (Index m = 0; m < n; ++m)
                        stacked.block(0, m * sketch, len, sketch) =
                            run.array().colwise() * pm.col(m).segment(b0, len).array();
                    run.noalias() = stacked.topRows(len) * hmat[static_cast<size_t>(j)];
                    esk[static_cast<size_t>(j)].middleRows(b0, len) = run;
                }
            }
        });
    }

    TensorTrain t;
    LeftMessages msgs(n_samples);
    for (Index j = 0; j + 1 < d; ++j) {
        const Eigen::MatrixXd& phi = blocks[j].matrix;
        Eigen::MatrixXd bp = Eigen::MatrixXd::Zero(msgs.rank() * n, sketch);
        const Eigen::MatrixXd& ej = esk[static_cast<size_t>(j)];
        for (Index b = 0; b < block_count(n_samples); ++b) {
            const Index i0 = b * kBlock;
            const Index len = std::min(kBlock, n_samples - i0);
            bp.noalias() += msgs.d_block(phi, i0, len) * ej.middleRows(i0, len);
        }
        bp *= inv_n;

        SvdConvention conv;
        conv.truncation_rank = ranks[j];
        const TruncatedSvd svd = truncated_svd(bp, conv);
        TtCore core = core_from_vectors(msgs.rank(), n, svd.U);
        msgs.advance(core, phi);
        t.cores.push_back(std::move(core));
    }
    t.cores.push_back(final_core(msgs, blocks[d - 1].matrix));
    return t;
}

TensorTrain compress(const std::vector<FeatureBlock>& blocks, const CompressSpec& spec) {
    switch (spec.algo) {
        case Algo::naive:
            return tt_svd_naive(dense_coefficient_tensor(blocks, spec.dense_cap), spec.ranks);
        case Algo::svd_fast:
            return tt_svd_fast(blocks, spec.ranks);
        case Algo::svd_kn:
            return tt_svd_kn(blocks, spec.ranks, spec.sketch_or_default(), spec.seed,
                             spec.pinv_rel_tol);
        case Algo::svd_c:
            return tt_svd_c(blocks, spec.ranks, spec.cluster_order);
        case Algo::svd_c_hier:
            return tt_svd_c_hier(blocks, spec.ranks, spec.sketch_or_default(), spec.seed,
                                 spec.pinv_rel_tol);
        case Algo::rsvd_t:
            return tt_rsvd_t(blocks, spec.ranks, spec.sketch_or_default(), spec.seed, spec.law);
    }
    throw config_error("compress: unknown algorithm");
}

}  // namespace ttde
