#pragma once

#include "kgen/common.hpp"
#include "kgen/species_kernel.hpp"

#include <array>
#include <iosfwd>
#include <string>

namespace kgen {

class VelocityGrid {
 public:
  VelocityGrid() = default;
  VelocityGrid(int dim, int n, double half_width);

  int dim() const { return dim_; }
  int points() const { return n_; }
  double half_width() const { return L_; }
  double spacing() const { return h_; }
  double cell_volume() const { return vol_; }
  Eigen::Index size() const { return size_; }
  Eigen::Index stride(int axis) const { return stride_[axis]; }

  double coordinate(int k) const { return -L_ + (k + 0.5) * h_; }
  std::array<int, 3> unflatten(Eigen::Index flat) const;
  Eigen::Index flatten(const std::array<int, 3>& k) const;
  Velocity node(Eigen::Index flat) const;
  // row r = node r
  Eigen::MatrixXd nodes() const;

  bool operator==(const VelocityGrid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && L_ == o.L_;
  }

 private:
  int dim_ = 0;
  int n_ = 0;
  double L_ = 0;
  double h_ = 0;
  double vol_ = 0;
  Eigen::Index size_ = 0;
  std::array<Eigen::Index, 3> stride_{};
};

VelocityGrid build_grid(int dim, int n, double half_width);

struct Field {
  VelocityGrid grid;
  Eigen::VectorXd values;
};

// One column per species.
struct Mixture {
  VelocityGrid grid;
  Eigen::MatrixXd values;

  int species_count() const { return static_cast<int>(values.cols()); }
  Field field(int i) const { return {grid, values.col(i)}; }
};

Mixture make_mixture(const std::vector<Field>& fields);

// Throws if a value is negative or a Fermi value exceeds one.
void validate(const Mixture& F, const SpeciesSet& species);

// Four-point Lagrange stencil along one axis.
struct AxisStencil {
  bool inside = false;
  int base = 0;
  std::array<double, 4> w{};
};

AxisStencil axis_stencil(const VelocityGrid& grid, double x);

enum class InterpMode { raw, clamped };

double interpolate(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& values,
                   const Velocity& v, InterpMode mode = InterpMode::raw);
inline double interpolate(const Field& f, const Velocity& v, InterpMode mode = InterpMode::raw) {
  return interpolate(f.grid, f.values, v, mode);
}

// Derivative along one axis: fourth-order central inside, five-point one-sided
// on the two outer layers.
Eigen::VectorXd gradient_axis(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                              int axis);
// Transpose of gradient_axis.
Eigen::VectorXd gradient_axis_transpose(const VelocityGrid& grid,
                                        const Eigen::Ref<const Eigen::VectorXd>& g, int axis);
// size x d
Eigen::MatrixXd grad_v(const Field& f);
Eigen::MatrixXd grad_v(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f);
// Negative adjoint of grad_v, so sum(phi * div(F)) = -sum(grad(phi) . F).
Eigen::VectorXd div_v(const VelocityGrid& grid, const Eigen::MatrixXd& flux);

struct Moments {
  Eigen::VectorXd mass;
  Velocity momentum;
  double energy = 0;
};

Moments moments(const Mixture& F, const SpeciesSet& species);

Field equilibrium(const SpeciesSet& species, int i, double mu, const Velocity& u, double T,
                  const VelocityGrid& grid);

struct SphereQuadrature {
  int dim = 2;
  int K = 0;
  Eigen::MatrixXd nodes;  // d x Q, axis 0 is the pole
  Eigen::VectorXd weights;
  int exact_degree = 0;

  Eigen::Index size() const { return weights.size(); }
};

SphereQuadrature sphere_quadrature(int dim, int K);

// Snapshot format: text header then little-endian float64 payload.
void write_field(std::ostream& os, const Field& f, int species_index);
Field read_field(std::istream& is, int* species_index = nullptr);
void write_field_csv(std::ostream& os, const Field& f);

}  // namespace kgen
