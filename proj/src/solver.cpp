#include "kgen/solver.hpp"

#include "kgen/entropy.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace kgen {

PairKernel build_kernel(const KernelSpec& s) {
  RadialFactor radial;
  if (s.radial == "maxwell")
    radial = maxwell_radial(s.c);
  else if (s.radial == "power-law")
    radial = power_law_radial(s.c, s.gamma);
  else if (s.radial == "exponential")
    radial = exponential_radial(s.c, s.rate);
  else if (s.radial == "tabulated")
    radial = tabulated_radial_from_file(s.table);
  else
    throw PreconditionError("kernel.radial: unknown kind '" + s.radial + "'");
  AngularFactor angular;
  if (s.angular == "constant")
    angular = constant_angular(s.angular_c);
  else if (s.angular == "cosine")
    angular = cosine_angular(s.angular_c);
  else if (s.angular == "none")
    angular = zero_angular();
  else
    throw PreconditionError("kernel.angular: unknown kind '" + s.angular + "'");
  return PairKernel(radial, angular);
}

SpeciesSet SimConfig::species() const { return SpeciesSet(masses, statistics); }
KernelSet SimConfig::kernels() const {
  return KernelSet(static_cast<int>(masses.size()), build_kernel(kernel));
}
VelocityGrid SimConfig::grid() const { return build_grid(dim, n, L); }

Mixture initial_state(const SimConfig& cfg) {
  const SpeciesSet sp = cfg.species();
  const VelocityGrid g = cfg.grid();
  require(static_cast<int>(cfg.initial.size()) == sp.size(),
          "initial: need one entry per species");
  std::vector<Field> fields;
  for (int i = 0; i < sp.size(); ++i) {
    const InitialSpec& in = cfg.initial[i];
    const std::string where = "initial[" + std::to_string(i) + "]";
    const double m = sp.mass(i);
    Field f{g, Eigen::VectorXd::Zero(g.size())};
    if (in.kind == InitialSpec::Kind::equilibrium) {
      require(in.u.size() == g.dim(), where + ".u: wrong dimension");
      try {
        f = equilibrium(sp, i, in.mu, in.u, in.T, g);
      } catch (const PreconditionError& e) {
        throw PreconditionError(where + ": " + e.what());
      }
    } else {
      for (std::size_t c = 0; c < in.components.size(); ++c) {
        const GaussianComponent& gc = in.components[c];
        require(gc.u.size() == g.dim(), where + ".components: wrong velocity dimension");
        require(gc.T > 0 && gc.density >= 0, where + ".components: need T > 0 and density >= 0");
        const double norm = gc.density * std::pow(m / (2.0 * pi * gc.T), 0.5 * g.dim());
        for (Eigen::Index k = 0; k < g.size(); ++k)
          f.values(k) += norm * std::exp(-0.5 * m * (g.node(k) - gc.u).squaredNorm() / gc.T);
      }
    }
    if (sp.statistics(i) == Statistics::fermi && f.values.maxCoeff() > 1.0) {
      std::ostringstream os;
      os << where << ": Fermi occupancy exceeds one (max " << f.values.maxCoeff() << ")";
      throw PreconditionError(os.str());
    }
    require(f.values.minCoeff() >= 0, where + ": negative density");
    fields.push_back(std::move(f));
  }
  return make_mixture(fields);
}

CollisionModel::CollisionModel(const SpeciesSet& species, const KernelSet& kernels,
                               const VelocityGrid& grid, int K, Flavor flavor)
    : species_(species), flavor_(flavor) {
  if (flavor == Flavor::boltzmann || flavor == Flavor::boltzmann_linear)
    boltz_ = std::make_unique<BoltzmannOperator>(species, kernels, grid,
                                                 sphere_quadrature(grid.dim(), K));
  else
    landau_ = std::make_unique<LandauOperator>(species, kernels, grid);
}

CollisionModel::~CollisionModel() = default;

CollisionResult CollisionModel::rhs(const Mixture& F, bool project) const {
  switch (flavor_) {
    case Flavor::boltzmann:
      return boltz_->q_total(F, project);
    case Flavor::landau:
      return landau_->q_total(F, project);
    case Flavor::boltzmann_linear:
      return boltz_->q_linear(F, project);
    case Flavor::landau_linear:
      return landau_->q_linear(F, project);
  }
  throw PreconditionError("unknown flavor");
}

double CollisionModel::entropy(const Mixture& F) const {
  if (is_linear(flavor_)) return 0.5 * F.grid.cell_volume() * F.values.squaredNorm();
  return entropy_H(F, species_);
}

double CollisionModel::dissipation(const Mixture& F) const {
  switch (flavor_) {
    case Flavor::boltzmann:
      return boltz_->dissipation(F);
    case Flavor::landau:
      return landau_->dissipation(F);
    case Flavor::boltzmann_linear:
      return boltz_->dissipation_linear(F);
    case Flavor::landau_linear:
      return landau_->dissipation_linear(F);
  }
  return 0.0;
}

namespace {

double clip(Mixture& F, const SpeciesSet& species) {
  double removed = 0.0;
  for (int i = 0; i < F.species_count(); ++i) {
    const bool fermi = species.statistics(i) == Statistics::fermi;
    for (Eigen::Index k = 0; k < F.values.rows(); ++k) {
      double& v = F.values(k, i);
      if (v < 0) {
        removed -= v;
        v = 0;
      } else if (fermi && v > 1) {
        removed += v - 1;
        v = 1;
      }
    }
  }
  return removed * F.grid.cell_volume();
}

// Puts back the conserved moments lost to clipping with a correction
// proportional to f tau, which keeps f >= 0 (and a Fermi f <= 1).
void restore_moments(Mixture& F, const Eigen::VectorXd& target, const SpeciesSet& species) {
  const std::vector<Eigen::MatrixXd> phi = collision_invariants(F.grid, species);
  const int K = static_cast<int>(phi.size());
  Eigen::MatrixXd w = F.values;
  for (int i = 0; i < F.species_count(); ++i)
    w.col(i).array() *= 1.0 + species.alpha(i) * F.values.col(i).array();
  Eigen::MatrixXd G(K, K);
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b)
      G(a, b) = F.grid.cell_volume() * (phi[a].array() * phi[b].array() * w.array()).sum();
  const Eigen::VectorXd r = target - collision_moments(F.grid, F.values, species);
  const Eigen::VectorXd c = G.completeOrthogonalDecomposition().solve(r);
  if (!c.allFinite()) return;
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(F.values.rows(), F.values.cols());
  for (int a = 0; a < K; ++a) corr += c(a) * phi[a];
  F.values += w.cwiseProduct(corr);
}

}  // namespace

StepResult step(const Mixture& F, double dt, const CollisionModel& model, Integrator integrator,
                bool project, const SpeciesSet& species) {
  require(dt > 0, "step: dt must be positive");
  StepResult out{F, 0.0};
  if (integrator == Integrator::euler) {
    out.F.values += dt * model.rhs(F, project).q;
  } else {
    const Eigen::MatrixXd k1 = model.rhs(F, project).q;
    Mixture G = F;
    G.values = F.values + 0.5 * dt * k1;
    const Eigen::MatrixXd k2 = model.rhs(G, project).q;
    G.values = F.values + 0.5 * dt * k2;
    const Eigen::MatrixXd k3 = model.rhs(G, project).q;
    G.values = F.values + dt * k3;
    const Eigen::MatrixXd k4 = model.rhs(G, project).q;
    out.F.values += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const Eigen::VectorXd before_clip =
      project ? collision_moments(F.grid, out.F.values, species) : Eigen::VectorXd();
  out.clipped_mass = clip(out.F, species);
  if (project && out.clipped_mass > 0) restore_moments(out.F, before_clip, species);
  const double mass = F.grid.cell_volume() * F.values.sum();
  if (out.clipped_mass > 1e-3 * mass) {
    std::ostringstream os;
    os << "resolution insufficient: clipped mass " << out.clipped_mass << " exceeds 1e-3 of "
       << mass;
    throw ResolutionError(os.str());
  }
  return out;
}

namespace {

DiagnosticsRow diagnostics(double t, const Mixture& F, const CollisionModel& model,
                           const SpeciesSet& sp, double clipped) {
  const Moments m = moments(F, sp);
  DiagnosticsRow r;
  r.t = t;
  r.mass = m.mass;
  r.momentum = m.momentum;
  r.energy = m.energy;
  r.H = model.entropy(F);
  r.D = model.dissipation(F);
  r.I = fisher_total(F);
  r.clipped_mass = clipped;
  return r;
}

}  // namespace

Trajectory simulate(const SimConfig& cfg) { return simulate(cfg, initial_state(cfg)); }

Trajectory simulate(const SimConfig& cfg, const Mixture& F0) {
  require(cfg.dt > 0 && cfg.t_end > 0, "run: dt and t_end must be positive");
  require(cfg.stride >= 1, "run.stride must be at least 1");
  const SpeciesSet sp = cfg.species();
  const KernelSet ks = cfg.kernels();
  validate(F0, sp);
  const CollisionModel model(sp, ks, F0.grid, cfg.K, cfg.op);

  Trajectory traj;
  traj.h = F0.grid.spacing();
  const long steps = std::lround(cfg.t_end / cfg.dt);
  require(steps >= 1, "run: t_end shorter than one step");

  {
    const double qmax = model.rhs(F0, cfg.projection).q.cwiseAbs().maxCoeff();
    if (cfg.dt * qmax > 0.1 * F0.values.maxCoeff()) {
      traj.dt_warning = true;
      std::ostringstream os;
      os << "time step may be too large: dt * max|Q| = " << cfg.dt * qmax
         << " exceeds 0.1 * max f = " << 0.1 * F0.values.maxCoeff();
      warn(os.str());
    }
  }

  Mixture F = F0;
  double clipped = 0.0;
  const Eigen::VectorXd mass0 = moments(F0, sp).mass;
  traj.rows.push_back(diagnostics(0.0, F, model, sp, 0.0));
  if (cfg.keep_snapshots) traj.snapshots.push_back(F);
  for (long s = 1; s <= steps; ++s) {
    Eigen::VectorXd before = moments(F, sp).mass;
    try {
      StepResult r = step(F, cfg.dt, model, cfg.integrator, cfg.projection, sp);
      F = std::move(r.F);
      clipped += r.clipped_mass;
    } catch (const ResolutionError& e) {
      traj.aborted = true;
      traj.message = e.what();
      return traj;
    }
    const Eigen::VectorXd after = moments(F, sp).mass;
    for (Eigen::Index i = 0; i < after.size(); ++i)
      if (mass0(i) > 0)
        traj.max_step_mass_drift =
            std::max(traj.max_step_mass_drift, std::abs(after(i) - before(i)) / mass0(i));
    if (s % cfg.stride == 0 || s == steps) {
      traj.rows.push_back(diagnostics(s * cfg.dt, F, model, sp, clipped));
      if (cfg.keep_snapshots) traj.snapshots.push_back(F);
    }
  }
  return traj;
}

HTheoremReport h_theorem_audit(const Trajectory& traj) {
  HTheoremReport r;
  for (std::size_t k = 1; k < traj.rows.size(); ++k) {
    const DiagnosticsRow &a = traj.rows[k - 1], &b = traj.rows[k];
    const double dH = b.H - a.H;
    if (dH > 0) {
      r.monotone = false;
      r.worst_increase = std::max(r.worst_increase, dH);
    }
    const double rate = dH / (b.t - a.t);
    const double D = 0.5 * (a.D + b.D);
    const double mismatch = D > 0 ? std::abs(rate + D) / D : std::abs(rate);
    r.max_mismatch = std::max(r.max_mismatch, mismatch);
    ++r.intervals;
  }
  return r;
}

DriftReport drift_report(const Trajectory& traj) {
  DriftReport d;
  d.mass_per_step = traj.max_step_mass_drift;
  if (traj.rows.size() < 2) return d;
  const DiagnosticsRow& r0 = traj.rows.front();
  // momentum scale sqrt(2 E sum m_i mass_i) is the natural magnitude when p0 = 0
  const double pscale = std::max(r0.momentum.norm(), std::sqrt(2.0 * r0.energy * r0.mass.sum()));
  for (std::size_t k = 1; k < traj.rows.size(); ++k) {
    const DiagnosticsRow& r = traj.rows[k];
    d.momentum_per_time =
        std::max(d.momentum_per_time, (r.momentum - r0.momentum).norm() / pscale / r.t);
    d.energy_per_time =
        std::max(d.energy_per_time, std::abs(r.energy - r0.energy) / std::abs(r0.energy) / r.t);
  }
  return d;
}

void write_diagnostics_csv(std::ostream& os, const Trajectory& traj, int species) {
  const auto old = os.precision(17);
  os << "t";
  for (int i = 1; i <= species; ++i) os << ",mass_" << i;
  const int d = traj.rows.empty() ? 2 : static_cast<int>(traj.rows.front().momentum.size());
  const char* axes[] = {"px", "py", "pz"};
  for (int c = 0; c < d; ++c) os << ',' << axes[c];
  os << ",E,H,D,I,clipped_mass\n";
  for (const DiagnosticsRow& r : traj.rows) {
    os << r.t;
    for (Eigen::Index i = 0; i < r.mass.size(); ++i) os << ',' << r.mass(i);
    for (Eigen::Index c = 0; c < r.momentum.size(); ++c) os << ',' << r.momentum(c);
    os << ',' << r.energy << ',' << r.H << ',' << r.D << ',' << r.I << ',' << r.clipped_mass << '\n';
  }
  os.precision(old);
}

}  // namespace kgen
