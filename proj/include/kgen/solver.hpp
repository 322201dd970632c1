#pragma once

#include "kgen/boltzmann.hpp"
#include "kgen/fisher.hpp"
#include "kgen/generic.hpp"
#include "kgen/landau.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kgen {

struct KernelSpec {
  std::string radial = "maxwell";  // maxwell | power-law | exponential | tabulated
  double c = 1.0;
  double gamma = 0.0;
  double rate = 1.0;
  std::string table;               // tabulated: two-column text file
  std::string angular = "constant";  // constant | cosine
  double angular_c = 1.0 / pi;
};

PairKernel build_kernel(const KernelSpec& spec);

struct GaussianComponent {
  double density = 1.0;
  Velocity u;
  double T = 1.0;
};

struct InitialSpec {
  enum class Kind { gaussians, equilibrium } kind = Kind::gaussians;
  std::vector<GaussianComponent> components;
  double mu = 0.0;  // equilibrium
  Velocity u;
  double T = 1.0;
};

enum class Integrator { euler, rk4 };

struct SimConfig {
  std::vector<double> masses;
  std::vector<Statistics> statistics;
  KernelSpec kernel;
  int dim = 2;
  int n = 32;
  double L = 6.0;
  int K = 16;
  Flavor op = Flavor::boltzmann;
  Integrator integrator = Integrator::euler;
  double dt = 1e-3;
  double t_end = 1.0;
  int stride = 10;          // diagnostics (and snapshots) every stride steps
  bool projection = true;
  bool keep_snapshots = false;
  std::vector<InitialSpec> initial;
  std::uint64_t seed = 1;

  SpeciesSet species() const;
  KernelSet kernels() const;
  VelocityGrid grid() const;
};

// Throws PreconditionError naming initial[i] when the state is not admissible.
Mixture initial_state(const SimConfig& cfg);

class ResolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// One operator flavor on one velocity grid. Linear flavors use the quadratic
// entropy 1/2 h^d sum f^2 and their Dirichlet form as D.
class CollisionModel {
 public:
  CollisionModel(const SpeciesSet& species, const KernelSet& kernels, const VelocityGrid& grid,
                 int K, Flavor flavor);
  ~CollisionModel();

  Flavor flavor() const { return flavor_; }
  CollisionResult rhs(const Mixture& F, bool project) const;
  double entropy(const Mixture& F) const;
  double dissipation(const Mixture& F) const;

 private:
  SpeciesSet species_;
  Flavor flavor_;
  std::unique_ptr<BoltzmannOperator> boltz_;
  std::unique_ptr<LandauOperator> landau_;
};

struct StepResult {
  Mixture F;
  double clipped_mass = 0;
};

// Explicit step; negative values (and Fermi values above one) are clipped.
// Throws ResolutionError when the clipped mass exceeds 1e-3 of the total.
StepResult step(const Mixture& F, double dt, const CollisionModel& model, Integrator integrator,
                bool project, const SpeciesSet& species);

struct DiagnosticsRow {
  double t = 0;
  Eigen::VectorXd mass;
  Velocity momentum;
  double energy = 0;
  double H = 0;
  double D = 0;
  double I = 0;
  double clipped_mass = 0;  // cumulative
};

struct Trajectory {
  std::vector<DiagnosticsRow> rows;
  std::vector<Mixture> snapshots;  // at the rows, when kept
  double h = 0;                    // velocity spacing
  double max_step_mass_drift = 0;  // over all steps and species
  bool aborted = false;
  std::string message;
  bool dt_warning = false;
};

Trajectory simulate(const SimConfig& cfg);
Trajectory simulate(const SimConfig& cfg, const Mixture& F0);

struct HTheoremReport {
  bool monotone = true;
  double worst_increase = 0;   // largest H(t_{k+1}) - H(t_k) (0 if none)
  double max_mismatch = 0;     // max |dH/dt + D| / D over row intervals
  int intervals = 0;
};

// Differences of H between rows against the trapezoid of D.
HTheoremReport h_theorem_audit(const Trajectory& traj);

// per unit time, relative to the initial magnitudes
struct DriftReport {
  double mass_per_step = 0;
  double momentum_per_time = 0;
  double energy_per_time = 0;
};
DriftReport drift_report(const Trajectory& traj);

void write_diagnostics_csv(std::ostream& os, const Trajectory& traj, int species);

}  // namespace kgen
