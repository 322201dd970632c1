#include "kgen/entropy.hpp"

#include "kgen/boltzmann.hpp"

#include <cmath>

namespace kgen {

namespace {
double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }
}  // namespace

double entropy_density(int alpha, double f) {
  if (!(f >= 0)) return HUGE_VAL;
  if (alpha == 0) return xlogx(f) - f;
  const double t = 1.0 + alpha * f;
  if (t < 0) return HUGE_VAL;  // Fermi above one
  return xlogx(f) - xlogx(t) / alpha;
}

double entropy_H(const Mixture& F, const SpeciesSet& species) {
  require(F.species_count() == species.size(), "entropy_H: mixture and species set disagree");
  double total = 0.0;
  for (int i = 0; i < species.size(); ++i) {
    const int a = species.alpha(i);
    double s = 0.0;
    for (Eigen::Index k = 0; k < F.values.rows(); ++k) {
      const double h = entropy_density(a, F.values(k, i));
      if (h == HUGE_VAL) return HUGE_VAL;
      s += h;
    }
    total += s;
  }
  return F.grid.cell_volume() * total;
}

Eigen::MatrixXd entropy_differential(const Mixture& F, const SpeciesSet& species) {
  require(F.species_count() == species.size(), "dH: mixture and species set disagree");
  Eigen::MatrixXd out(F.values.rows(), F.values.cols());
  for (int i = 0; i < species.size(); ++i) {
    const double top = F.values.col(i).maxCoeff();
    if (!(top > 0)) {
      out.col(i).setZero();
      continue;
    }
    const double floor = density_floor * top;
    const int a = species.alpha(i);
    for (Eigen::Index k = 0; k < F.values.rows(); ++k) {
      const double f = std::max(F.values(k, i), floor);
      const double t = std::max(1.0 + a * f, density_floor);
      out(k, i) = std::log(f / t);
    }
  }
  return out;
}

}  // namespace kgen
