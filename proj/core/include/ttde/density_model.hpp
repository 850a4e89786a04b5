#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ttde/basis.hpp"
#include "ttde/grid.hpp"
#include "ttde/tensor_train.hpp"

namespace ttde {

// One factor of the separable mean-field density.
struct MeanField1d {
    bool is_uniform = true;
    GridSpec grid;           // domain either way
    Eigen::VectorXd values;  // tabulated at grid centers when not uniform

    static MeanField1d uniform(const GridSpec& g) {
        MeanField1d m;
        m.is_uniform = true;
        m.grid = g;
        return m;
    }

    static MeanField1d tabulated(const GridSpec& g, Eigen::VectorXd v) {
        if (v.size() != g.points())
            throw config_error("MeanField1d: value count does not match grid");
        MeanField1d m;
        m.is_uniform = false;
        m.grid = g;
        m.values = std::move(v);
        return m;
    }

    double density(double x) const {
        if (is_uniform) return 1.0 / (grid.hi - grid.lo);
        return interp_at_centers(grid, values, x);
    }

    Eigen::VectorXd at_centers() const {
        if (!is_uniform) return values;
        return Eigen::VectorXd::Constant(grid.points(), 1.0 / (grid.hi - grid.lo));
    }
};

struct PcaMap {
    Eigen::MatrixXd rotation;  // original d x model d', orthonormal columns
    Eigen::VectorXd center;    // length original d
};

// Fitted density p(x) = (1/Z) * prod_j mu_j(x_j) * chain_j sum_l G_j(:,l,:) phi_l(x_j),
// with the deconvolution weights already folded into the coefficient cores.
// When a PCA map is present the chain runs over z = Q^T (x - center).
struct DensityModel {
    TensorTrain coeff;
    std::vector<BasisFamily> basis;
    std::vector<MeanField1d> mean_field;
    std::vector<GridSpec> box;  // per model dimension; also the sampler/quadrature grid
    double alpha = 1.0;
    double lambda = 0.0;
    std::optional<PcaMap> pca;
    double norm_const = 1.0;  // Z

    Index dim() const { return coeff.order(); }

    // Dimension of the space points live in (original space when PCA present).
    Index ambient_dim() const { return pca ? pca->rotation.rows() : dim(); }

    void validate() const;
};

}  // namespace ttde
