// One line per criterion; nonzero exit when any fails.

#include "kgen/boltzmann.hpp"
#include "kgen/config.hpp"
#include "kgen/experiments.hpp"
#include "kgen/landau.hpp"
#include "kgen/oracle.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace kgen;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int n, const Verdict& v, double secs) {
  if (!v.pass) ++failures;
  std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << " ["
            << std::fixed << std::setprecision(1) << secs << " s]" << std::defaultfloat << std::endl;
}

template <typename Fn>
void run(int n, Fn&& fn) {
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = fn();
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  report(n, v, seconds_since(t0));
}

const SuiteResult* find_suite(const std::vector<SuiteResult>& s, const std::string& name) {
  for (const auto& r : s)
    if (r.name == name) return &r;
  return nullptr;
}

Verdict collision_geometry() {
  std::mt19937_64 rng(20261016);
  std::normal_distribution<double> Z;
  std::uniform_real_distribution<double> M(0.5, 5.0);
  const auto t0 = Clock::now();
  double worst = 0;
  for (int s = 0; s < 10000; ++s) {
    const int d = s % 2 ? 3 : 2;
    Velocity v(d), w(d), om(d);
    for (int k = 0; k < d; ++k) {
      v(k) = 2 * Z(rng);
      w(k) = 2 * Z(rng);
      om(k) = Z(rng);
    }
    om.normalize();
    const double mi = M(rng), mj = M(rng);
    const auto [vp, wp] = post_collision(v, w, om, mi, mj);
    const Velocity p = mi * v + mj * w;
    const double pscale = mi * v.norm() + mj * w.norm();
    const double E = 0.5 * (mi * v.squaredNorm() + mj * w.squaredNorm());
    const double Ep = 0.5 * (mi * vp.squaredNorm() + mj * wp.squaredNorm());
    worst = std::max(worst, (mi * vp + mj * wp - p).norm() / pscale);
    worst = std::max(worst, std::abs(Ep - E) / E);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 1.0, "max_relative_residual=" + sci(worst) + " time=" + sci(t) + "s"};
}

Verdict oracle_equivalence() {
  const auto t0 = Clock::now();
  OracleTolerances tol;
  tol.oracle = 1e-9;
  tol.consistency = 1e-8;
  const OracleSuite s = run_oracle_suite(7, tol, 16);
  double worst_oracle = 0, worst_consistency = 0;
  for (const auto& c : s.checks)
    (c.tol == tol.oracle ? worst_oracle : worst_consistency) =
        std::max(c.tol == tol.oracle ? worst_oracle : worst_consistency, c.value);
  const double t = seconds_since(t0);
  return {s.pass && t < 120.0, std::to_string(s.checks.size()) + " checks, max_oracle=" + sci(worst_oracle) +
                                   " max_weak_strong=" + sci(worst_consistency)};
}

Verdict equilibrium_annihilation() {
  // L = 3.5: the equilibrium tails stay above the density floor on every grid
  const double L = 3.5;
  bool ok = true;
  std::string detail;
  for (int a : {-1, 0, 1}) {
    const Statistics st = statistics_from_alpha(a);
    const SpeciesSet sp({1.0, 2.0}, {st, st});
    const KernelSet ks(2, PairKernel(maxwell_radial(1.0), constant_angular(1.0 / pi)));
    const SphereQuadrature sq = sphere_quadrature(2, 16);
    std::vector<double> h, eb, el;
    for (int n : {16, 24, 32}) {
      const VelocityGrid g = build_grid(2, n, L);
      Velocity u(2);
      u << 0.3, -0.2;
      const double mu0 = a == 1 ? -0.5 : 0.0;
      const Mixture F = make_mixture({equilibrium(sp, 0, mu0, u, 1.0, g), equilibrium(sp, 1, mu0 - 0.3, u, 1.0, g)});
      eb.push_back(BoltzmannOperator(sp, ks, g, sq).q_total(F).q.cwiseAbs().maxCoeff());
      el.push_back(LandauOperator(sp, ks, g).q_total(F).q.cwiseAbs().maxCoeff());
      h.push_back(g.spacing());
    }
    const double ob = fitted_order(h, eb);
    const bool b_ok = ob >= 2.0 && eb[2] < eb[1] && eb[1] < eb[0];
    // the discrete Landau operator is exact on equilibria, leaving round-off only
    const double lmax = *std::max_element(el.begin(), el.end());
    const bool l_ok = lmax <= 1e-12 || fitted_order(h, el) >= 2.0;
    ok = ok && b_ok && l_ok;
    detail += "alpha=" + std::to_string(a) + " boltzmann_order=" + sci(ob) + " landau_max=" + sci(lmax) + "; ";
  }
  return {ok, detail};
}

struct ReferenceRun {
  bool done = false;
  std::string error;
  SimulateOutcome out;
  RunConfig cfg;
};

ReferenceRun& reference() {
  static ReferenceRun r = [] {
    ReferenceRun rr;
    try {
      rr.cfg = load_config(std::string(KGEN_CONFIG_DIR) + "/reference.json");
      rr.out = run_simulate(rr.cfg);
      rr.done = !rr.out.traj.aborted;
      if (rr.out.traj.aborted) rr.error = rr.out.traj.message;
    } catch (const std::exception& e) {
      rr.error = e.what();
    }
    return rr;
  }();
  return r;
}

Verdict h_theorem() {
  const ReferenceRun& r = reference();
  if (!r.done) return {false, "reference run failed: " + r.error};
  const SimConfig& s = r.cfg.sim;
  const bool setup = s.dim == 2 && s.n == 32 && s.K == 16 && s.t_end == 1.0 && s.dt == 1e-3;
  const HTheoremReport& h = r.out.h;
  return {setup && h.monotone && h.max_mismatch <= 0.05,
          "intervals=" + std::to_string(h.intervals) + " worst_increase=" + sci(h.worst_increase) +
              " max_mismatch=" + sci(h.max_mismatch)};
}

Verdict generic_degeneracy() {
  RunConfig cfg = load_config(std::string(KGEN_CONFIG_DIR) + "/reference.json");
  cfg.generic.pairs = 20;
  const GenericOutcome g = run_verify_generic(cfg);
  double m_de = 0, sym = 0, psd = HUGE_VAL;
  for (const auto& f : g.report.flavors) {
    m_de = std::max(m_de, f.m_dE);
    sym = std::max(sym, f.symmetry);
    psd = std::min(psd, f.psd_min);
  }
  const bool ok = g.report.flavors.size() == 4 && g.report.pairs == 20 && m_de <= 1e-12 &&
                  g.l_dS_decreasing && g.l_dS_order >= 2.0 && g.report.antisymmetry <= 1e-8 && sym <= 1e-8 &&
                  psd >= -1e-8;
  return {ok, "M_dE=" + sci(m_de) + " L_dS_order=" + sci(g.l_dS_order) + " L_antisymmetry=" +
                  sci(g.report.antisymmetry) + " M_symmetry=" + sci(sym) + " M_psd_min=" + sci(psd)};
}

Verdict fisher_monotonicity() {
  const ReferenceRun& r = reference();
  if (!r.done) return {false, "reference run failed: " + r.error};
  const FisherReport& f = r.out.fisher;
  return {r.out.hypothesis.holds && f.violations == 0,
          "hypothesis=" + std::string(r.out.hypothesis.holds ? "holds" : "fails") +
              " violations=" + std::to_string(f.violations) + " tol_mono=" + sci(f.tol_mono) +
              " I0=" + sci(f.I.front()) + " I_end=" + sci(f.I.back())};
}

Verdict sphere_inequality() {
  const RunConfig cfg = load_config(std::string(KGEN_CONFIG_DIR) + "/reference.json");
  const PairKernel k = cfg.sim.kernels()(0, 1);
  const ScalarFunction b = [k](double t) { return k.angular(t); };
  const int K = 128;
  const LambdaEstimate est = estimate_lambda_b(b, 2, 100, 11, K);
  const double lambda = est.lambda / 2.0;
  const SphereCalculus sc(2, K);
  // fresh seed, same even family as the estimator
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> U(-1.0, 1.0), amp(0.05, 2.0);
  double worst = HUGE_VAL;
  for (int s = 0; s < 200; ++s) {
    const double A = amp(rng);
    std::vector<double> a(3);
    for (double& x : a) x = A * U(rng);
    worst = std::min(worst, lsi_gap(even_trig_density(sc, a), b, lambda));
  }
  return {worst >= -1e-8, "lambda_hat=" + sci(est.lambda) + " min_gap=" + sci(worst)};
}

Verdict grazing_limit() {
  const RunConfig cfg = load_config(std::string(KGEN_CONFIG_DIR) + "/reference.json");
  const GrazingOutcome g = run_grazing(cfg);
  bool ok = g.sweep.rows.size() == 4;
  std::string detail;
  for (const auto& s : g.suites) {
    ok = ok && s.pass;
    detail += s.name + (s.pass ? "=pass " : "=FAIL ") + "(" + s.detail + ") ";
  }
  return {ok, detail};
}

Verdict conservation() {
  const ReferenceRun& r = reference();
  if (!r.done) return {false, "reference run failed: " + r.error};
  const DriftReport& d = r.out.drift;
  return {r.cfg.sim.projection && d.mass_per_step <= 1e-12 && d.momentum_per_time <= 1e-8 &&
              d.energy_per_time <= 1e-8,
          "mass_per_step=" + sci(d.mass_per_step) + " momentum_per_time=" + sci(d.momentum_per_time) +
              " energy_per_time=" + sci(d.energy_per_time)};
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const fs::path root = fs::current_path() / "acceptance_determinism";
  fs::remove_all(root);
  const std::string cli = std::string("\"") + KGEN_CLI + "\"";
  const std::string cfg = std::string(KGEN_CONFIG_DIR) + "/short.json";
  for (const char* run : {"a", "b"}) {
    const fs::path d = root / run;
    if (shell(cli + " oracle --seed 7 --out \"" + (d / "oracle").string() + "\"") != 0)
      return {false, "oracle run failed"};
    if (shell(cli + " simulate --config \"" + cfg + "\" --seed 3 --out \"" + (d / "simulate").string() + "\"") != 0)
      return {false, "simulate run failed"};
  }
  int compared = 0;
  for (const char* f : {"oracle/oracle.csv", "simulate/diagnostics.csv", "simulate/fisher.csv"}) {
    const std::string a = slurp(root / "a" / f), b = slurp(root / "b" / f);
    if (a.empty() || a != b) return {false, std::string("outputs differ: ") + f};
    ++compared;
  }
  return {true, std::to_string(compared) + " csv files bitwise identical"};
}

}  // namespace

int main() {
  run(1, collision_geometry);
  run(2, oracle_equivalence);
  run(3, equilibrium_annihilation);
  run(4, h_theorem);
  run(5, generic_degeneracy);
  run(6, fisher_monotonicity);
  run(7, sphere_inequality);
  run(8, grazing_limit);
  run(9, conservation);
  run(10, determinism);
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
