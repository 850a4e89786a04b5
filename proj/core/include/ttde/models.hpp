#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "ttde/basis.hpp"
#include "ttde/estimator.hpp"
#include "ttde/tensor_train.hpp"

namespace ttde {

// Gaussian mixture benchmark: outer mixture over component widths, inner
// mixture over the two mean vectors (-0.5, +0.5) * ones.
struct GmSpec {
    Index d = 10;
    double box_half_width = 1.5;
    double mesh = 0.1;

    static constexpr std::array<double, 3> outer_weights{1.0 / 6.0, 1.0 / 3.0, 1.0 / 2.0};
    static constexpr std::array<double, 3> sigmas{0.18, 0.20, 0.22};
    static constexpr std::array<double, 2> inner_weights{2.0 / 3.0, 1.0 / 3.0};
    static constexpr std::array<double, 2> means{-0.5, 0.5};

    struct Component {
        double weight, mean, sigma;
    };
    static std::array<Component, 6> components();

    std::vector<GridSpec> box() const {
        return std::vector<GridSpec>(static_cast<size_t>(d),
                                     GridSpec(-box_half_width, box_half_width, mesh));
    }
};

SampleSet gm_sample(const GmSpec& spec, Index count, std::uint64_t seed);

// Exact coefficient TT of the mixture density over the box (components
// truncated to the box and renormalized): rank 6, every dimension shares the
// same per-component coefficient vector.
TensorTrain gm_truth_tt(const GmSpec& spec, const BasisFamily& basis);

// Ginzburg-Landau potentials with pinned boundary values.
struct GlSpec {
    enum class Kind { gl1d, gl2d };

    Kind kind = Kind::gl1d;
    Index d = 10;     // total dimension (m*m for gl2d)
    Index side = 0;   // lattice side m, gl2d only
    double lambda = 0.03;
    double beta = 1.0 / 8.0;
    double box_half_width = 2.5;
    double mesh = 0.05;

    static GlSpec gl1d(Index d);
    static GlSpec gl2d(Index m);

    double h() const {
        return 1.0 / (1.0 + static_cast<double>(kind == Kind::gl1d ? d : side));
    }

    std::vector<GridSpec> box() const {
        return std::vector<GridSpec>(static_cast<size_t>(d),
                                     GridSpec(-box_half_width, box_half_width, mesh));
    }
};

double gl_potential(const GlSpec& spec, const Eigen::VectorXd& x);
Eigen::VectorXd gl_gradient(const GlSpec& spec, const Eigen::VectorXd& x);

struct LangevinConfig {
    double step = 0.0;              // 0 selects the default 5e-3 / beta
    Index burn_in = 10000;
    Index thinning = 10;
    Index samples_per_chain = 500;
    std::uint64_t seed = 0;
    double init_half_width = 0.0;   // 0 selects the full box

    double step_or_default(double beta) const { return step > 0 ? step : 5e-3 / beta; }
};

// Euler-Maruyama on dX = -beta grad V dt + sqrt(2) dW with independent chains;
// thinned states outside the box are skipped (the chain keeps running).
SampleSet langevin_sample(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_v,
                          double beta, const std::vector<GridSpec>& box,
                          const LangevinConfig& cfg, Index count);

SampleSet gl_langevin_sample(const GlSpec& spec, const LangevinConfig& cfg, Index count);

}  // namespace ttde
