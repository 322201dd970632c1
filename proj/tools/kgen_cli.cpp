#include "kgen/config.hpp"
#include "kgen/experiments.hpp"
#include "kgen/oracle.hpp"
#include "kgen/parallel.hpp"
#include "kgen/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace kgen;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  int threads = 0;
  std::vector<double> eps;
  std::vector<std::string> tol_overrides;
  std::optional<std::uint64_t> seed;
  int max_n = 16;
  bool sign_fault = false;
};

// exit code for a finished run: 0 only when every suite passed
int verdict(const RunManifest& m) { return m.all_pass() ? 0 : 1; }

class OutputDir {
 public:
  OutputDir(const std::string& dir, RunManifest& m) : dir_(dir), m_(m) {}
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }
  void write(const std::string& name, const std::function<void(std::ostream&)>& fn) {
    const std::string p = path(name);
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p);
    fn(os);
    m_.outputs.push_back(p);
  }

 private:
  std::string dir_;
  RunManifest& m_;
};

RunConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  RunConfig cfg = load_config(o.config);
  for (const auto& t : o.tol_overrides) apply_tolerance_override(cfg, t);
  if (o.seed) cfg.sim.seed = *o.seed;
  if (!o.eps.empty()) cfg.grazing.eps = o.eps;
  return cfg;
}

void report_suites(const RunManifest& m) {
  for (const auto& s : m.suites)
    std::cout << s.name << ": " << (s.pass ? "pass" : "FAIL") << "  " << s.detail << "\n";
}

int cmd_simulate(const Options& o, RunManifest& m, OutputDir& out) {
  const RunConfig cfg = load(o);
  m.config_echo = cfg.echo;
  const SimulateOutcome r = run_simulate(cfg);
  const int N = static_cast<int>(cfg.sim.masses.size());
  out.write("diagnostics.csv", [&](std::ostream& os) { write_diagnostics_csv(os, r.traj, N); });
  for (std::size_t k = 0; k < r.traj.snapshots.size(); ++k)
    for (int i = 0; i < N; ++i)
      out.write("snapshot_" + std::to_string(k) + "_species" + std::to_string(i) + ".txt",
                [&](std::ostream& os) { write_field(os, r.traj.snapshots[k].field(i), i); });
  if (r.traj.aborted) {
    m.error = r.traj.message;
    std::cerr << "error: " << r.traj.message << "\n";
    return 2;
  }
  out.write("fisher.csv", [&](std::ostream& os) { write_fisher_csv(os, r.fisher); });
  for (const auto& s : r.suites) m.add(s);
  report_suites(m);
  return verdict(m);
}

int cmd_verify_generic(const Options& o, RunManifest& m, OutputDir& out) {
  const RunConfig cfg = load(o);
  m.config_echo = cfg.echo;
  const GenericOutcome r = run_verify_generic(cfg, o.sign_fault);
  out.write("generic_report.txt", [&](std::ostream& os) { os << format_report(r.report); });
  out.write("generic_refinement.csv", [&](std::ostream& os) { write_refine_csv(os, r.refine); });
  std::cout << format_report(r.report);
  for (const auto& s : r.suites) m.add(s);
  report_suites(m);
  return verdict(m);
}

int cmd_grazing(const Options& o, RunManifest& m, OutputDir& out) {
  const RunConfig cfg = load(o);
  m.config_echo = cfg.echo;
  const GrazingOutcome r = run_grazing(cfg);
  out.write("grazing.csv", [&](std::ostream& os) { write_grazing_csv(os, r.sweep); });
  for (const auto& lc : r.lemma)
    out.write("lemma_" + lc.name + ".csv", [&](std::ostream& os) { write_lemma_csv(os, lc.table); });
  out.write("perp.csv", [&](std::ostream& os) { write_perp_csv(os, r.perp); });
  for (const auto& s : r.suites) m.add(s);
  report_suites(m);
  return verdict(m);
}

int cmd_oracle(const Options& o, RunManifest& m, OutputDir& out) {
  std::uint64_t seed = 7;
  RunConfig cfg;
  if (!o.config.empty()) {
    cfg = load(o);
    m.config_echo = cfg.echo;
    seed = cfg.sim.seed;
  } else {
    for (const auto& t : o.tol_overrides) apply_tolerance_override(cfg, t);
  }
  if (o.seed) seed = *o.seed;
  require(o.max_n >= 8 && o.max_n <= 16, "--max-n must lie in [8, 16]");
  OracleTolerances tol;
  tol.oracle = cfg.tol.at("oracle");
  tol.consistency = cfg.tol.at("consistency");
  const OracleSuite s = run_oracle_suite(seed, tol, o.max_n);
  out.write("oracle.csv", [&](std::ostream& os) { write_oracle_csv(os, s); });
  int failed = 0;
  for (const auto& c : s.checks) failed += c.pass ? 0 : 1;
  m.add({"oracle", s.pass, std::to_string(s.checks.size() - failed) + "/" + std::to_string(s.checks.size())});
  report_suites(m);
  return verdict(m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgen: multi-species Boltzmann and Landau toolkit"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "worker cap (0: hardware)")->check(CLI::NonNegativeNumber);

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "config file (JSON)");
    if (needs_config) c->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--tol-override", o.tol_overrides, "NAME=VALUE")->allow_extra_args(false);
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--threads", o.threads, "worker cap (0: hardware)")->check(CLI::NonNegativeNumber);
  };
  CLI::App* sim = app.add_subcommand("simulate", "time integration with audits");
  common(sim, true);
  CLI::App* gen = app.add_subcommand("verify-generic", "GENERIC degeneracy checks");
  common(gen, true);
  gen->add_flag("--inject-sign-fault", o.sign_fault, "test hook: negate M");
  CLI::App* gr = app.add_subcommand("grazing", "grazing-limit experiments");
  common(gr, true);
  gr->add_option("--eps", o.eps, "comma separated scales in (0,1)")->delimiter(',');
  CLI::App* orc = app.add_subcommand("oracle", "brute-force equivalence checks");
  common(orc, false);
  orc->add_option("--max-n", o.max_n, "largest grid size (8..16)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (o.threads > 0) set_thread_count(o.threads);

  RunManifest m;
  m.started = utc_timestamp();
  m.config_path = o.config;
  CLI::App* chosen = app.get_subcommands().front();
  m.command = chosen->get_name();

  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << o.out << ": " << ec.message() << "\n";
    return 1;
  }
  OutputDir out(o.out, m);

  int code = 1;
  try {
    if (chosen == sim)
      code = cmd_simulate(o, m, out);
    else if (chosen == gen)
      code = cmd_verify_generic(o, m, out);
    else if (chosen == gr)
      code = cmd_grazing(o, m, out);
    else
      code = cmd_oracle(o, m, out);
  } catch (const ResolutionError& e) {
    m.error = e.what();
    std::cerr << "error: " << e.what() << "\n";
    code = 2;
  } catch (const std::exception& e) {
    m.error = e.what();
    std::cerr << "error: " << e.what() << "\n";
    code = 1;
  }
  m.exit_code = code;
  m.finished = utc_timestamp();
  const std::string manifest = out.path("manifest.txt");
  try {
    write_manifest(manifest, m);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code == 0 ? 1 : code;
  }
  return code;
}
