#pragma once

#include "kgen/species_kernel.hpp"
#include "kgen/velocity_grid.hpp"

#include <functional>
#include <memory>

namespace kgen {

namespace detail {
class SweepGeometry;
}

double tau(const SpeciesSet& species, int i, double f);

// series truncation error stays below 1e-15 relative at the switch
inline constexpr double log_mean_threshold = 1e-2;
double log_mean(double s, double t);

using TestFunction = std::function<double(const Velocity&)>;

double grad_bar(const TestFunction& phi_i, const TestFunction& phi_j, const Velocity& vi,
                const Velocity& vj, const Velocity& omega, double mi, double mj);

struct CollisionResult {
  VelocityGrid grid;
  Eigen::MatrixXd q;           // size x N
  Eigen::MatrixXd pair_norms;  // (i,j): h^d-weighted L2 norm of Q_ij
  double correction_norm = 0;
  bool projected = false;

  Field field(int i) const { return {grid, q.col(i)}; }
};

// adjoint: Q is the exact grid adjoint of the weak form (gain and loss are
// split between the sample nodes and the post-collision stencils).
// gather: Q_ij(v) = h^d sum_j sum_q w B G evaluated at grid nodes only.
enum class CollisionForm { adjoint, gather };

// Relative positivity floor for entropy-type integrands.
inline constexpr double density_floor = 1e-12;

class BoltzmannOperator {
 public:
  BoltzmannOperator(const SpeciesSet& species, const KernelSet& kernels, const VelocityGrid& grid,
                    const SphereQuadrature& squad, CollisionForm form = CollisionForm::adjoint);
  ~BoltzmannOperator();
  BoltzmannOperator(BoltzmannOperator&&) noexcept;

  const VelocityGrid& grid() const { return grid_; }
  const SpeciesSet& species() const { return species_; }
  CollisionForm form() const { return form_; }

  Eigen::VectorXd q_pair(const Mixture& F, int i, int j) const;
  CollisionResult q_total(const Mixture& F, bool project = false) const;
  // -1/4 sum_ij int B grad_bar(Phi) (f'f'tt - fft't'), phi is size x N
  double weak_form(const Mixture& F, const Eigen::MatrixXd& phi) const;
  double dissipation(const Mixture& F) const;
  // M(F) xi; Q = M(F)(-dH) up to the floor convention
  Eigen::MatrixXd mobility(const Mixture& F, const Eigen::MatrixXd& xi) const;

  Eigen::MatrixXd mobility_linear(const Eigen::MatrixXd& xi) const;
  CollisionResult q_linear(const Mixture& F, bool project = false) const;
  double dissipation_linear(const Mixture& F) const;
  double weak_form_linear(const Mixture& F, const Eigen::MatrixXd& phi) const;

 private:
  SpeciesSet species_;
  VelocityGrid grid_;
  CollisionForm form_;
  std::unique_ptr<detail::SweepGeometry> geo_;
};

Eigen::VectorXd q_pair(const Mixture& F, int i, int j, const SpeciesSet& species,
                       const KernelSet& kernels, const SphereQuadrature& squad);
CollisionResult q_total(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels,
                        const SphereQuadrature& squad, bool project = false);
double weak_form(const Mixture& F, const Eigen::MatrixXd& phi, const SpeciesSet& species,
                 const KernelSet& kernels, const SphereQuadrature& squad);
double entropy_dissipation_B(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels,
                             const SphereQuadrature& squad);
CollisionResult q_linear_B(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels,
                           const SphereQuadrature& squad);

// Least-squares minimal correction so that per-species mass, total momentum
// and total energy moments of Q vanish.
CollisionResult conservative_projection(const CollisionResult& Q, const SpeciesSet& species);

// Moment residuals of a collision output: [mass_1..N, momentum, energy].
Eigen::VectorXd collision_moments(const VelocityGrid& grid, const Eigen::MatrixXd& q,
                                  const SpeciesSet& species);

// Grid samples of the collision invariants, one column block per invariant:
// returns a list of size x N matrices (per-species ones, then m v_c, then m|v|^2/2).
std::vector<Eigen::MatrixXd> collision_invariants(const VelocityGrid& grid, const SpeciesSet& species);

}  // namespace kgen
