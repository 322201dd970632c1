#include "kgen/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace kgen {

using nlohmann::json;

std::map<std::string, double> default_tolerances() {
  return {
      {"oracle", 1e-9},          {"consistency", 1e-8},       {"h_mismatch", 0.05},
      {"mass_drift", 1e-12},     {"momentum_drift", 1e-8},    {"energy_drift", 1e-8},
      {"generic_M_dE", 1e-12},   {"generic_defect", 1e-8},    {"generic_order", 2.0},
      {"grazing_relative", 0.05}, {"grazing_order", 1.0},     {"perp_relative", 0.01},
      {"lsi_gap", 1e-8},
  };
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown field");
}

const json& section(const json& root, const char* key) {
  if (!root.contains(key)) fail(key, "missing section");
  return root.at(key);
}

double number(const json& obj, const std::string& path, const char* key, double fallback,
              bool required = false) {
  if (!obj.contains(key)) {
    if (required) fail(join(path, key), "missing");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

int integer(const json& obj, const std::string& path, const char* key, int fallback,
            bool required = false) {
  if (!obj.contains(key)) {
    if (required) fail(join(path, key), "missing");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  return v.get<int>();
}

std::string text(const json& obj, const std::string& path, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

bool boolean(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(join(path, key), "expected true or false");
  return v.get<bool>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) fail(path + "[" + std::to_string(k) + "]", "expected a number");
    out.push_back(v[k].get<double>());
  }
  return out;
}

Velocity vec(const json& v, const std::string& path, int dim) {
  const auto x = numbers(v, path);
  if (static_cast<int>(x.size()) != dim) fail(path, "expected " + std::to_string(dim) + " components");
  Velocity out(dim);
  for (int c = 0; c < dim; ++c) out(c) = x[c];
  return out;
}

Statistics statistics_named(const std::string& s, const std::string& path) {
  if (s == "maxwell" || s == "classical") return Statistics::maxwell;
  if (s == "bose") return Statistics::bose;
  if (s == "fermi") return Statistics::fermi;
  fail(path, "expected maxwell, bose or fermi");
}

void parse_species(const json& root, SimConfig& sim) {
  const json& sp = section(root, "species");
  if (!sp.is_array() || sp.empty()) fail("species", "expected a nonempty array");
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const std::string p = "species[" + std::to_string(i) + "]";
    only_keys(sp[i], p, {"mass", "statistics"});
    const double m = number(sp[i], p, "mass", 0, true);
    if (!(m > 0)) fail(p + ".mass", "must be positive");
    sim.masses.push_back(m);
    sim.statistics.push_back(statistics_named(text(sp[i], p, "statistics", "maxwell"), p + ".statistics"));
  }
}

void parse_kernel(const json& root, SimConfig& sim) {
  const json& k = section(root, "kernel");
  only_keys(k, "kernel", {"radial", "c", "gamma", "rate", "table", "angular", "angular_c"});
  KernelSpec& ks = sim.kernel;
  ks.radial = text(k, "kernel", "radial", ks.radial);
  if (ks.radial != "maxwell" && ks.radial != "power-law" && ks.radial != "exponential" &&
      ks.radial != "tabulated")
    fail("kernel.radial", "expected maxwell, power-law, exponential or tabulated");
  ks.c = number(k, "kernel", "c", ks.c);
  ks.gamma = number(k, "kernel", "gamma", ks.gamma);
  ks.rate = number(k, "kernel", "rate", ks.rate);
  ks.table = text(k, "kernel", "table", ks.table);
  if (ks.radial == "tabulated" && ks.table.empty()) fail("kernel.table", "required for a tabulated kernel");
  ks.angular = text(k, "kernel", "angular", ks.angular);
  if (ks.angular != "constant" && ks.angular != "cosine")
    fail("kernel.angular", "expected constant or cosine");
  ks.angular_c = number(k, "kernel", "angular_c", ks.angular_c);
  if (!(ks.c >= 0)) fail("kernel.c", "must be nonnegative");
  if (!(ks.angular_c >= 0)) fail("kernel.angular_c", "must be nonnegative");
}

void parse_grid(const json& root, SimConfig& sim) {
  const json& g = section(root, "grid");
  only_keys(g, "grid", {"dim", "n", "L", "K"});
  sim.dim = integer(g, "grid", "dim", sim.dim);
  sim.n = integer(g, "grid", "n", sim.n);
  sim.L = number(g, "grid", "L", sim.L);
  sim.K = integer(g, "grid", "K", sim.K);
  if (sim.dim != 2 && sim.dim != 3) fail("grid.dim", "must be 2 or 3");
  if (sim.n < 8 || sim.n % 2) fail("grid.n", "must be even and at least 8");
  if (!(sim.L > 0)) fail("grid.L", "must be positive");
  if (sim.K < 8 || sim.K % 2) fail("grid.K", "must be even and at least 8");
}

void parse_run(const json& root, SimConfig& sim) {
  const json& r = section(root, "run");
  only_keys(r, "run", {"operator", "integrator", "dt", "t_end", "stride", "projection", "snapshots"});
  const std::string op = text(r, "run", "operator", to_string(sim.op));
  try {
    sim.op = flavor_from_string(op);
  } catch (const PreconditionError&) {
    fail("run.operator", "expected boltzmann, landau, boltzmann-linear or landau-linear");
  }
  const std::string integ = text(r, "run", "integrator", "euler");
  if (integ == "euler")
    sim.integrator = Integrator::euler;
  else if (integ == "rk4")
    sim.integrator = Integrator::rk4;
  else
    fail("run.integrator", "expected euler or rk4");
  sim.dt = number(r, "run", "dt", sim.dt);
  sim.t_end = number(r, "run", "t_end", sim.t_end);
  sim.stride = integer(r, "run", "stride", sim.stride);
  sim.projection = boolean(r, "run", "projection", sim.projection);
  sim.keep_snapshots = boolean(r, "run", "snapshots", sim.keep_snapshots);
  if (!(sim.dt > 0)) fail("run.dt", "must be positive");
  if (!(sim.t_end > 0)) fail("run.t_end", "must be positive");
  if (sim.stride < 1) fail("run.stride", "must be at least 1");
}

void parse_initial(const json& root, SimConfig& sim) {
  const json& in = section(root, "initial");
  if (!in.is_array()) fail("initial", "expected an array with one entry per species");
  if (in.size() != sim.masses.size()) fail("initial", "need one entry per species");
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::string p = "initial[" + std::to_string(i) + "]";
    only_keys(in[i], p, {"gaussians", "equilibrium"});
    InitialSpec spec;
    if (in[i].contains("equilibrium") == in[i].contains("gaussians"))
      fail(p, "give exactly one of gaussians or equilibrium");
    if (in[i].contains("equilibrium")) {
      const json& e = in[i].at("equilibrium");
      const std::string q = p + ".equilibrium";
      only_keys(e, q, {"mu", "u", "T"});
      spec.kind = InitialSpec::Kind::equilibrium;
      spec.mu = number(e, q, "mu", 0.0);
      spec.T = number(e, q, "T", 1.0);
      spec.u = e.contains("u") ? vec(e.at("u"), q + ".u", sim.dim) : Velocity(Velocity::Zero(sim.dim));
      if (!(spec.T > 0)) fail(q + ".T", "must be positive");
    } else {
      const json& gs = in[i].at("gaussians");
      if (!gs.is_array() || gs.empty()) fail(p + ".gaussians", "expected a nonempty array");
      for (std::size_t c = 0; c < gs.size(); ++c) {
        const std::string q = p + ".gaussians[" + std::to_string(c) + "]";
        only_keys(gs[c], q, {"density", "u", "T"});
        GaussianComponent gc;
        gc.density = number(gs[c], q, "density", 1.0);
        gc.T = number(gs[c], q, "T", 1.0);
        gc.u = gs[c].contains("u") ? vec(gs[c].at("u"), q + ".u", sim.dim)
                                   : Velocity(Velocity::Zero(sim.dim));
        if (!(gc.density >= 0)) fail(q + ".density", "must be nonnegative");
        if (!(gc.T > 0)) fail(q + ".T", "must be positive");
        spec.components.push_back(gc);
      }
    }
    sim.initial.push_back(spec);
  }
}

void parse_checks(const json& root, RunConfig& cfg) {
  if (!root.contains("checks")) return;
  const json& c = root.at("checks");
  only_keys(c, "checks", {"generic", "grazing", "fisher", "tolerances"});
  if (c.contains("generic")) {
    const json& g = c.at("generic");
    only_keys(g, "checks.generic", {"pairs", "nx", "n", "L", "refine"});
    GenericChecks& gc = cfg.generic;
    gc.pairs = integer(g, "checks.generic", "pairs", gc.pairs);
    gc.nx = integer(g, "checks.generic", "nx", gc.nx);
    gc.n = integer(g, "checks.generic", "n", gc.n);
    gc.L = number(g, "checks.generic", "L", gc.L);
    if (gc.pairs < 1) fail("checks.generic.pairs", "must be at least 1");
    if (gc.nx < 2 || gc.nx % 2) fail("checks.generic.nx", "must be even and at least 2");
    if (gc.n < 8 || gc.n % 2) fail("checks.generic.n", "must be even and at least 8");
    if (g.contains("refine")) {
      const json& r = g.at("refine");
      if (!r.is_array() || r.size() < 2) fail("checks.generic.refine", "expected two or more [nx, n] pairs");
      gc.refine.clear();
      for (std::size_t k = 0; k < r.size(); ++k) {
        const std::string q = "checks.generic.refine[" + std::to_string(k) + "]";
        if (!r[k].is_array() || r[k].size() != 2 || !r[k][0].is_number_integer() ||
            !r[k][1].is_number_integer())
          fail(q, "expected [nx, n]");
        gc.refine.emplace_back(r[k][0].get<int>(), r[k][1].get<int>());
      }
    }
  }
  if (c.contains("grazing")) {
    const json& g = c.at("grazing");
    only_keys(g, "checks.grazing", {"eps", "base", "thetas"});
    if (g.contains("eps")) cfg.grazing.eps = numbers(g.at("eps"), "checks.grazing.eps");
    if (g.contains("thetas")) cfg.grazing.thetas = numbers(g.at("thetas"), "checks.grazing.thetas");
    cfg.grazing.base = text(g, "checks.grazing", "base", cfg.grazing.base);
    if (cfg.grazing.base != "sin2" && cfg.grazing.base != "constant")
      fail("checks.grazing.base", "expected sin2 or constant");
  }
  if (c.contains("fisher")) {
    const json& f = c.at("fisher");
    only_keys(f, "checks.fisher", {"lambda_samples", "lsi_samples", "K", "r_max"});
    cfg.fisher.lambda_samples = integer(f, "checks.fisher", "lambda_samples", cfg.fisher.lambda_samples);
    cfg.fisher.lsi_samples = integer(f, "checks.fisher", "lsi_samples", cfg.fisher.lsi_samples);
    cfg.fisher.K = integer(f, "checks.fisher", "K", cfg.fisher.K);
    cfg.fisher.r_max = number(f, "checks.fisher", "r_max", cfg.fisher.r_max);
    if (cfg.fisher.lambda_samples < 100) fail("checks.fisher.lambda_samples", "must be at least 100");
  }
  if (c.contains("tolerances")) {
    const json& t = c.at("tolerances");
    if (!t.is_object()) fail("checks.tolerances", "expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      const std::string p = "checks.tolerances." + it.key();
      if (!cfg.tol.count(it.key())) fail(p, "unknown tolerance");
      if (!it.value().is_number()) fail(p, "expected a number");
      cfg.tol[it.key()] = it.value().get<double>();
    }
  }
}

std::string syntax_message(const json::parse_error& e, const std::string& text) {
  std::size_t line = 1, col = 1;
  const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
  for (std::size_t k = 0; k < end; ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  std::ostringstream os;
  os << "config syntax error at line " << line << ", column " << col << ": " << e.what();
  return os.str();
}

}  // namespace

RunConfig parse_config(const std::string& src) {
  json root;
  try {
    root = json::parse(src);
  } catch (const json::parse_error& e) {
    throw ConfigError(syntax_message(e, src));
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  only_keys(root, "", {"species", "kernel", "grid", "run", "initial", "checks", "seed"});
  RunConfig cfg;
  parse_species(root, cfg.sim);
  parse_kernel(root, cfg.sim);
  parse_grid(root, cfg.sim);
  parse_run(root, cfg.sim);
  parse_initial(root, cfg.sim);
  parse_checks(root, cfg);
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    cfg.sim.seed = s.get<std::uint64_t>();
  }
  cfg.echo = root.dump(2);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_tolerance_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--tol-override expects NAME=VALUE");
  const std::string name = assignment.substr(0, eq);
  if (!cfg.tol.count(name)) throw ConfigError("--tol-override: unknown tolerance '" + name + "'");
  const std::string value = assignment.substr(eq + 1);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !(v >= 0))
    throw ConfigError("--tol-override: bad value for '" + name + "'");
  cfg.tol[name] = v;
}

}  // namespace kgen
