#include "kgen/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace kgen {

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

double tol(const RunConfig& cfg, const char* name) { return cfg.tol.at(name); }

}  // namespace

SimulateOutcome run_simulate(const RunConfig& cfg) {
  SimulateOutcome out;
  const SimConfig& sim = cfg.sim;
  out.traj = simulate(sim);
  if (out.traj.aborted) return out;

  out.h = h_theorem_audit(out.traj);
  out.suites.push_back({"h_theorem", out.h.monotone && out.h.max_mismatch <= tol(cfg, "h_mismatch"),
                        "worst_increase=" + sci(out.h.worst_increase) +
                            " max_mismatch=" + sci(out.h.max_mismatch)});

  // the monotonicity theorem is stated for classical statistics
  bool classical = true;
  for (Statistics s : sim.statistics) classical = classical && s == Statistics::maxwell;
  std::vector<double> r_samples;
  for (int k = 1; k <= 40; ++k) r_samples.push_back(cfg.fisher.r_max * k / 40.0);
  out.hypothesis = fisher_hypothesis(sim.kernels(), sim.dim, cfg.fisher.lambda_samples, sim.seed,
                                     r_samples);
  const bool holds = classical && out.hypothesis.holds;
  std::vector<double> t, I;
  for (const auto& r : out.traj.rows) {
    t.push_back(r.t);
    I.push_back(r.I);
  }
  out.fisher = monotonicity_audit(t, I, out.traj.h, holds);
  if (!classical) out.fisher.note = "quantum statistics; monotonicity not expected";
  // outside the hypothesis an increase is informational only
  out.suites.push_back({"fisher", !holds || out.fisher.violations == 0,
                        out.fisher.note + "; violations=" + std::to_string(out.fisher.violations) +
                            " tol_mono=" + sci(out.fisher.tol_mono)});

  if (sim.projection) {
    out.drift = drift_report(out.traj);
    const bool ok = out.drift.mass_per_step <= tol(cfg, "mass_drift") &&
                    out.drift.momentum_per_time <= tol(cfg, "momentum_drift") &&
                    out.drift.energy_per_time <= tol(cfg, "energy_drift");
    out.suites.push_back({"conservation", ok,
                          "mass_per_step=" + sci(out.drift.mass_per_step) +
                              " momentum_per_time=" + sci(out.drift.momentum_per_time) +
                              " energy_per_time=" + sci(out.drift.energy_per_time)});
  }
  return out;
}

GenericOutcome run_verify_generic(const RunConfig& cfg, bool sign_fault) {
  const SimConfig& sim = cfg.sim;
  const GenericChecks& gc = cfg.generic;
  const SpeciesSet sp = sim.species();
  const KernelSet ks = sim.kernels();
  const SphereQuadrature squad = sphere_quadrature(sim.dim, sim.K);
  GenericOutcome out;

  {
    const PhaseGrid g(gc.nx, build_grid(sim.dim, gc.n, gc.L));
    GenericBlocks blocks(sp, ks, g, squad);
    blocks.inject_sign_fault(sign_fault);
    const PhaseField F = local_equilibrium_slab(g, sp);
    out.report = degeneracy_report(
        blocks, F, {Flavor::boltzmann, Flavor::landau, Flavor::boltzmann_linear, Flavor::landau_linear},
        gc.pairs, sim.seed);
  }

  std::vector<double> h, err;
  for (const auto& [nx, n] : gc.refine) {
    const PhaseGrid g(nx, build_grid(sim.dim, n, gc.L));
    const GenericBlocks blocks(sp, ks, g, squad);
    const PhaseField F = local_equilibrium_slab(g, sp);
    const DegeneracyReport r = degeneracy_report(blocks, F, {}, 2, sim.seed);
    out.refine.push_back({nx, n, g.dx(), r.l_dS});
    if (!err.empty() && !(r.l_dS < err.back())) out.l_dS_decreasing = false;
    h.push_back(g.dx());
    err.push_back(r.l_dS);
  }
  out.l_dS_order = fitted_order(h, err);

  double m_de = 0, sym = 0, psd = HUGE_VAL;
  for (const auto& f : out.report.flavors) {
    m_de = std::max(m_de, f.m_dE);
    sym = std::max(sym, f.symmetry);
    psd = std::min(psd, f.psd_min);
  }
  const double defect = tol(cfg, "generic_defect");
  out.suites.push_back({"generic_M_dE", m_de <= tol(cfg, "generic_M_dE"), "max=" + sci(m_de)});
  out.suites.push_back({"generic_M_symmetry", sym <= defect, "max=" + sci(sym)});
  out.suites.push_back({"generic_M_psd", psd >= -defect, "min=" + sci(psd)});
  out.suites.push_back({"generic_L_antisymmetry", out.report.antisymmetry <= defect,
                        "max=" + sci(out.report.antisymmetry)});
  out.suites.push_back({"generic_L_dS_order",
                        out.l_dS_decreasing && out.l_dS_order >= tol(cfg, "generic_order"),
                        "order=" + sci(out.l_dS_order)});
  return out;
}

ScalarFunction grazing_base(const std::string& name) {
  if (name == "sin2")
    return [](double t) {
      const double s = std::sin(2.0 * t);
      return s * s;
    };
  if (name == "constant") return [](double) { return 1.0; };
  throw PreconditionError("unknown grazing base '" + name + "'");
}

GrazingOutcome run_grazing(const RunConfig& cfg) {
  const SimConfig& sim = cfg.sim;
  require(sim.dim == 2, "grazing: the sweep runs in d = 2");
  for (double e : cfg.grazing.eps) require(e > 0 && e < 1, "grazing: eps must lie in (0,1)");
  const SpeciesSet sp = sim.species();
  const Mixture F = initial_state(sim);
  const GrazingFamily fam(grazing_base(cfg.grazing.base), 2, sp);
  const RadialFactor radial = build_kernel(sim.kernel).radial_factor();
  GrazingOutcome out;
  out.sweep = grazing_sweep(F, sp, fam, radial, cfg.grazing.eps, test_battery(F.grid, sp.size()));
  const double final_rel = out.sweep.rows.back().relative;
  out.suites.push_back({"grazing_sweep",
                        out.sweep.strictly_decreasing && final_rel <= tol(cfg, "grazing_relative"),
                        std::string("strictly_decreasing=") + (out.sweep.strictly_decreasing ? "1" : "0") +
                            " final_relative_gap=" + sci(final_rel)});

  Velocity c1(2), p1(2), c2(2), p2(2), z(2), vi(2), vj(2);
  c1 << 0.3, -0.2;
  p1 << 0.5, 0.1;
  c2 << -0.4, 0.6;
  p2 << -0.2, 0.3;
  z << 0.0, 0.0;
  vi << 0.7, 0.2;
  vj << -0.3, 0.5;
  const SmoothFunction phi_i = gaussian_poly(c1, 1.1, 1.0, p1), phi_j = gaussian_poly(c2, 0.9, 0.7, p2);
  const SmoothFunction f_i = gaussian_poly(z, 1.0, 0.3, p1), f_j = gaussian_poly(c1, 1.2, 0.4, p2);
  const int i = 0, j = sp.size() - 1;
  std::vector<std::pair<int, int>> alphas{{sp.alpha(i), sp.alpha(j)}};
  if (alphas[0] != std::pair<int, int>{0, 0}) alphas.emplace_back(0, 0);
  bool lemma_ok = true;
  std::string detail;
  for (const auto& [ai, aj] : alphas) {
    LemmaCase lc;
    lc.name = "alpha" + std::to_string(ai) + "_" + std::to_string(aj);
    lc.table = grazing_lemma_check(cfg.grazing.thetas, phi_i, phi_j, f_i, f_j, vi, vj, sp.mass(i),
                                   sp.mass(j), ai, aj);
    const LemmaRow& last = lc.table.rows.back();
    const double rel = last.residual / std::max(std::abs(last.rhs), 1e-300);
    lemma_ok = lemma_ok && lc.table.order >= tol(cfg, "grazing_order") && rel <= tol(cfg, "perp_relative");
    detail += lc.name + ".order=" + sci(lc.table.order) + " ";
    out.lemma.push_back(std::move(lc));
  }
  out.suites.push_back({"grazing_lemma", lemma_ok, detail});

  Velocity k(2);
  k << 1.0, 0.0;
  out.perp = perp_identity_check(cfg.grazing.thetas, k);
  const PerpRow& pr = out.perp.rows.back();
  out.suites.push_back({"perp_identity",
                        out.perp.order >= tol(cfg, "grazing_order") &&
                            pr.residual / 2.0 <= tol(cfg, "perp_relative"),
                        "coefficient=" + sci(pr.coefficient) + " order=" + sci(out.perp.order)});
  return out;
}

void write_refine_csv(std::ostream& os, const std::vector<RefineRow>& rows) {
  const auto old = os.precision(17);
  os << "nx,n,dx,L_dS_residual\n";
  for (const auto& r : rows) os << r.nx << ',' << r.n << ',' << r.dx << ',' << r.l_dS << '\n';
  os.precision(old);
}

}  // namespace kgen
