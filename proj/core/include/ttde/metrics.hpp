#pragma once

#include "ttde/density_model.hpp"
#include "ttde/estimator.hpp"

namespace ttde {

// Relative L2 distance ||p - q|| / ||q|| via rank-space contraction of the
// grid-tabulated functional tensor trains; midpoint quadrature on the shared
// box. Models may use different bases and ranks but must share the box.
double rel_l2(const DensityModel& p, const DensityModel& q);

// Truth given as a coefficient TT in p's convention (basis from `basis`,
// p's mean-field and box, Z = 1).
double rel_l2(const DensityModel& p, const TensorTrain& truth_coeff,
              const std::vector<BasisFamily>& truth_basis);

// || G~ - G* ||_F / ||G*||_F with each Gram scaled by its own sample count.
double second_moment_error(const SampleSet& generated, const SampleSet& reference);

}  // namespace ttde
