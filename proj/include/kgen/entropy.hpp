#pragma once

#include "kgen/species_kernel.hpp"
#include "kgen/velocity_grid.hpp"

namespace kgen {

// h(f) with h'(f) = log(f / tau(f)):
//   alpha = 0:  f log f - f
//   alpha != 0: f log f - tau log tau / alpha
// 0 log 0 = 0; +inf outside the admissible range.
double entropy_density(int alpha, double f);

// h^d sum_i sum_v h_i(f_i); +inf when any Fermi value leaves [0, 1].
double entropy_H(const Mixture& F, const SpeciesSet& species);

// log(f / tau) per species. Values below the density floor (and Fermi
// occupancies with tau below it) are evaluated at the floor so the field stays
// finite; an empty species gets dH = 0.
Eigen::MatrixXd entropy_differential(const Mixture& F, const SpeciesSet& species);

}  // namespace kgen
