#pragma once

#include "kgen/boltzmann.hpp"
#include "kgen/species_kernel.hpp"
#include "kgen/velocity_grid.hpp"

#include <array>
#include <vector>

namespace kgen {

// id - g g^T / |g|^2 with g = vi - vj.
Tensor pi_projection(const Velocity& vi, const Velocity& vj);

// P (gi/mi - gj/mj)
Velocity grad_tilde(const Velocity& gi, const Velocity& gj, const Tensor& P, double mi, double mj);

// Landau operator in flux form on a velocity grid.
//
// With u_i = f_i tau_i and the discrete gradient G, the flux of species i at
// node a against species j is
//   h^d sum_{b != a} r^2 alpha_ij(r) Pi(v_a - v_b) (u_j(b) W_i(a) - u_i(a) W_j(b)),
// with W = u G(xi) / m. M xi = -(1/m_i) div flux, div being minus the transpose
// of G, and Q = -M dH. Weak and strong forms agree to round-off.
class LandauOperator {
 public:
  LandauOperator(const SpeciesSet& species, const KernelSet& kernels, const VelocityGrid& grid);

  const VelocityGrid& grid() const { return grid_; }
  const SpeciesSet& species() const { return species_; }

  Eigen::VectorXd q_pair(const Mixture& F, int i, int j) const;
  CollisionResult q_total(const Mixture& F, bool project = false) const;
  double weak_form(const Mixture& F, const Eigen::MatrixXd& phi) const;
  double dissipation(const Mixture& F) const;
  Eigen::MatrixXd mobility(const Mixture& F, const Eigen::MatrixXd& xi) const;

  Eigen::MatrixXd mobility_linear(const Eigen::MatrixXd& xi) const;
  CollisionResult q_linear(const Mixture& F, bool project = false) const;
  double dissipation_linear(const Mixture& F) const;
  double weak_form_linear(const Mixture& F, const Eigen::MatrixXd& phi) const;

 private:
  struct Offset {
    std::array<int, 3> o{};        // 3-axis layout, leading axis unused in 2D
    std::array<double, 9> pi{};    // Pi(o), row-major d x d
  };

  // flux of every species, size x d each; restricted to one ordered pair when asked
  std::vector<Eigen::MatrixXd> flux(const Eigen::MatrixXd& u, const std::vector<Eigen::MatrixXd>& W,
                                    int only_i = -1, int only_j = -1) const;
  Eigen::MatrixXd divergence(const std::vector<Eigen::MatrixXd>& flux) const;
  // -1/2 h^{2d} sum K (u_j W_i - u_i W_j) . Pi (P_i - P_j)
  double pairing(const Eigen::MatrixXd& u, const std::vector<Eigen::MatrixXd>& W,
                 const std::vector<Eigen::MatrixXd>& P) const;
  // 1/2 h^{2d} sum K u_i u_j |Pi (X_i - X_j)|^2, cells with u <= floor skipped
  double squared_norm(const Eigen::MatrixXd& u, const std::vector<Eigen::MatrixXd>& X,
                      const std::vector<double>& floors) const;
  // u grad(dH) / m
  std::vector<Eigen::MatrixXd> entropy_fluxes(const Mixture& F, const Eigen::MatrixXd& u) const;
  // grad(values_i) / m_i, size x d per species
  std::vector<Eigen::MatrixXd> gradients(const Eigen::MatrixXd& values) const;
  int pair_slot(int i, int j) const;

  SpeciesSet species_;
  VelocityGrid grid_;
  std::vector<Offset> offsets_;
  std::vector<std::vector<double>> weight_;  // per unordered pair, per offset
};

Eigen::VectorXd q_landau_pair(const Mixture& F, int i, int j, const SpeciesSet& species,
                              const KernelSet& kernels);
CollisionResult q_landau_total(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels,
                               bool project = false);
double weak_form_L(const Mixture& F, const Eigen::MatrixXd& phi, const SpeciesSet& species,
                   const KernelSet& kernels);
double entropy_dissipation_L(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels);
CollisionResult q_linear_L(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels);

}  // namespace kgen
