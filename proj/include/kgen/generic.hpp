#pragma once

#include "kgen/boltzmann.hpp"
#include "kgen/entropy.hpp"
#include "kgen/landau.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace kgen {

// Periodic slab x in [0, 1) times a velocity grid.
struct PhaseGrid {
  int nx = 0;
  VelocityGrid v;

  PhaseGrid() = default;
  PhaseGrid(int nx_points, const VelocityGrid& velocity);
  double dx() const { return 1.0 / nx; }
  double x(int k) const { return k * dx(); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(nx) * v.size(); }
  double cell_volume() const { return dx() * v.cell_volume(); }
  bool operator==(const PhaseGrid& o) const { return nx == o.nx && v == o.v; }
};

// Row x * |v-grid| + k holds node (x_x, v_k); one column per species.
struct PhaseField {
  PhaseGrid grid;
  Eigen::MatrixXd values;

  int species_count() const { return static_cast<int>(values.cols()); }
  Mixture slice(int x) const;
  void set_slice(int x, const Eigen::MatrixXd& block);
};

PhaseField make_phase_field(const PhaseGrid& grid, int species);
// dx h^d sum xi eta
double phase_inner(const PhaseGrid& grid, const Eigen::MatrixXd& xi, const Eigen::MatrixXd& eta);
double phase_norm(const PhaseGrid& grid, const Eigen::MatrixXd& xi);

double energy_E(const PhaseField& F, const SpeciesSet& species);
Velocity momentum_M(const PhaseField& F, const SpeciesSet& species);
double entropy_H(const PhaseField& F, const SpeciesSet& species);
Eigen::MatrixXd dH(const PhaseField& F, const SpeciesSet& species);
// m_i |v|^2 / 2
Eigen::MatrixXd dE(const PhaseGrid& grid, const SpeciesSet& species);

enum class Flavor { boltzmann, landau, boltzmann_linear, landau_linear };
std::string to_string(Flavor f);
Flavor flavor_from_string(const std::string& name);
inline bool is_linear(Flavor f) { return f == Flavor::boltzmann_linear || f == Flavor::landau_linear; }

// Operators {L, M, E, S} on a phase grid. M acts slice by slice.
class GenericBlocks {
 public:
  GenericBlocks(const SpeciesSet& species, const KernelSet& kernels, const PhaseGrid& grid,
                const SphereQuadrature& squad);

  const PhaseGrid& grid() const { return grid_; }
  const SpeciesSet& species() const { return species_; }

  // -[d_x(f d_{v_x} xi / m) - d_{v_x}(f d_x xi / m)]
  Eigen::MatrixXd L_apply(const PhaseField& F, const Eigen::MatrixXd& xi) const;
  Eigen::MatrixXd M_apply(const PhaseField& F, const Eigen::MatrixXd& xi, Flavor flavor) const;
  // dS: -dH, or -F for the linear flavors
  Eigen::MatrixXd dS(const PhaseField& F, Flavor flavor) const;
  // L dE + M dS
  Eigen::MatrixXd generic_rhs(const PhaseField& F, Flavor flavor) const;
  // -v_x d_x f
  Eigen::MatrixXd transport(const PhaseField& F) const;

  // test hook: multiplies M by -1 so the PSD check must fail
  void inject_sign_fault(bool on) { sign_fault_ = on; }

 private:
  Eigen::MatrixXd dx_apply(const Eigen::MatrixXd& values) const;

  SpeciesSet species_;
  PhaseGrid grid_;
  Eigen::MatrixXd Dx_;
  std::unique_ptr<BoltzmannOperator> boltz_;
  std::unique_ptr<LandauOperator> landau_;
  bool sign_fault_ = false;
};

struct FlavorDefects {
  Flavor flavor;
  double scale = 0;         // max ||M a|| / ||a|| over the test functions
  double m_dE = 0;          // ||M dE|| / (||dE|| scale)
  double symmetry = 0;      // max |<a,Mb>-<b,Ma>| / sqrt(<a,Ma><b,Mb>)
  double psd_min = 0;       // min <a,Ma> / (||a||^2 scale)
};

struct DegeneracyReport {
  double l_dS = 0;          // ||L dS|| / ||F||
  double antisymmetry = 0;  // max |<a,Lb>+<b,La>| / (||a|| ||b|| ||F||)
  std::vector<FlavorDefects> flavors;
  int pairs = 0;
};

// Local equilibria with density, drift and temperature varying along x.
PhaseField local_equilibrium_slab(const PhaseGrid& grid, const SpeciesSet& species);

// Smooth random test functions: low Fourier modes in x times Gaussian-weighted
// low-degree polynomials in v, drawn from a seeded generator.
Eigen::MatrixXd random_smooth_field(const PhaseGrid& grid, int species, std::uint64_t seed);

// flavors may be empty: then only the L checks run
DegeneracyReport degeneracy_report(const GenericBlocks& blocks, const PhaseField& F,
                                   const std::vector<Flavor>& flavors, int pairs = 20,
                                   std::uint64_t seed = 7);

// key: value lines
std::string format_report(const DegeneracyReport& r);

}  // namespace kgen
