#pragma once

#include "kgen/boltzmann.hpp"
#include "kgen/landau.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace kgen {

// A function with analytic first and second derivatives.
struct SmoothFunction {
  std::function<double(const Velocity&)> value;
  std::function<Velocity(const Velocity&)> grad;
  std::function<Tensor(const Velocity&)> hess;
};

// a exp(-|v - c|^2 / (2 s^2)) (1 + p . v)
SmoothFunction gaussian_poly(const Velocity& c, double s, double a, const Velocity& p);

// Per-species grid samples of a battery of smooth test functions, one
// size x N matrix each.
std::vector<Eigen::MatrixXd> test_battery(const VelocityGrid& grid, int species);

struct GrazingRow {
  double eps = 0;
  int K = 0;               // circle nodes used
  int support_nodes = 0;   // nodes with theta in [0, eps/2]
  double boltzmann = 0;    // sum over the battery of <Q^B_eps, Phi>
  double landau = 0;
  double gap = 0;          // sqrt(sum (B - L)^2)
  double relative = 0;     // gap / sqrt(sum L^2)
};

struct GrazingTable {
  std::vector<GrazingRow> rows;
  bool strictly_decreasing = true;
};

// Fewest circle nodes for eps: K >= 64 / eps and at least 16 nodes in the support.
int grazing_nodes(double eps);

// Boltzmann weak form with the scaled kernels of `family` against the Landau
// weak form with A = r^2 alpha / m_i. Only the angular quadrature changes with eps.
GrazingTable grazing_sweep(const Mixture& F, const SpeciesSet& species, const GrazingFamily& family,
                           const RadialFactor& radial, const std::vector<double>& eps_list,
                           const std::vector<Eigen::MatrixXd>& battery);

struct LemmaRow {
  double theta = 0;
  double lhs = 0;
  double rhs = 0;
  double residual = 0;
};

struct LemmaTable {
  std::vector<LemmaRow> rows;
  double order = 0;  // least-squares slope of log residual against log theta
};

// d = 2. LHS(theta) = theta^-2 sum_{gamma = +-} tau_i' tau_j' grad_bar Phi;
// RHS is the small-angle limit assembled from analytic derivatives.
LemmaTable grazing_lemma_check(const std::vector<double>& thetas, const SmoothFunction& phi_i,
                               const SmoothFunction& phi_j, const SmoothFunction& f_i,
                               const SmoothFunction& f_j, const Velocity& vi, const Velocity& vj,
                               double mi, double mj, int alpha_i, int alpha_j);

struct PerpRow {
  double theta = 0;
  double coefficient = 0;  // gamma . S gamma / theta^2
  double along = 0;        // k . S k / theta^2
  double off_diagonal = 0; // k . S gamma / theta^2
  double residual = 0;     // |coefficient - 2|
};

struct PerpTable {
  std::vector<PerpRow> rows;
  double order = 0;
};

// S = sum_{gamma = +-} (omega - k)(omega - k)^T in d = 2.
PerpTable perp_identity_check(const std::vector<double>& thetas, const Velocity& k);

double fitted_order(const std::vector<double>& h, const std::vector<double>& err);

void write_grazing_csv(std::ostream& os, const GrazingTable& t);
void write_lemma_csv(std::ostream& os, const LemmaTable& t);
void write_perp_csv(std::ostream& os, const PerpTable& t);

}  // namespace kgen
