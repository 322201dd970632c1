#include "kgen/config.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace kgen;
using nlohmann::json;

namespace {

std::string read(const std::string& name) {
  std::ifstream in(std::string(KGEN_CONFIG_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json base() { return json::parse(read("short.json")); }

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped configurations parse") {
  for (const char* name : {"reference.json", "short.json", "quantum_short.json"}) {
    INFO(name);
    RunConfig rc = load_config(std::string(KGEN_CONFIG_DIR) + "/" + name);
    CHECK(rc.sim.masses.size() == rc.sim.initial.size());
    CHECK(rc.sim.grid().dim() == 2);
    CHECK_FALSE(rc.echo.empty());
    CHECK_NOTHROW(initial_state(rc.sim));
  }
  RunConfig s = parse_config(read("short.json"));
  CHECK(s.sim.n == 16);
  CHECK(s.sim.L == 4.0);
  CHECK(s.sim.masses == std::vector<double>{1.0, 2.0});
  CHECK(s.sim.kernel.angular_c == doctest::Approx(1.0 / pi));
  CHECK(s.sim.dt == 0.001);
  CHECK(s.sim.stride == 5);
  CHECK(s.sim.initial[0].components.size() == 2);
  CHECK(s.generic.refine.size() == 3);
  CHECK(s.grazing.eps == std::vector<double>{0.8, 0.4, 0.2, 0.1});
  CHECK(s.fisher.lambda_samples == 100);
  CHECK(s.tol == default_tolerances());
  CHECK(json::parse(s.echo) == base());
}

TEST_CASE("field errors name the offending path") {
  json j = base();
  j["grid"]["spacing"] = 0.1;
  CHECK(error_of(j.dump()).find("grid.spacing") != std::string::npos);

  j = base();
  j.erase("kernel");
  const std::string e = error_of(j.dump());
  CHECK(e.find("kernel") != std::string::npos);
  CHECK(e.find("missing") != std::string::npos);

  j = base();
  j["grid"]["n"] = 15;
  CHECK(error_of(j.dump()).find("grid.n") != std::string::npos);
  j = base();
  j["run"]["integrator"] = "leapfrog";
  CHECK(error_of(j.dump()).find("run.integrator") != std::string::npos);
  j = base();
  j["initial"].erase(1);
  CHECK(error_of(j.dump()).find("initial") != std::string::npos);
  j = base();
  j["initial"][1]["gaussians"][0]["T"] = -1.0;
  CHECK(error_of(j.dump()).find("initial[1]") != std::string::npos);
  j = base();
  j["species"][0]["statistics"] = "anyon";
  CHECK(error_of(j.dump()).find("species[0]") != std::string::npos);
  j = base();
  j["checks"]["fisher"]["lambda_samples"] = 20;
  CHECK(error_of(j.dump()).find("lambda_samples") != std::string::npos);
  j = base();
  j["checks"]["tolerances"] = {{"oracle", 1e-7}};
  CHECK(parse_config(j.dump()).tol.at("oracle") == 1e-7);
  j["checks"]["tolerances"] = {{"nonsense", 1.0}};
  CHECK(error_of(j.dump()).find("nonsense") != std::string::npos);
}

TEST_CASE("syntax errors report the location") {
  const std::string text = "{\n  \"species\": [\n    {\"mass\": 1.0,,}\n  ]\n}\n";
  const std::string e = error_of(text);
  CHECK(e.find("line 3") != std::string::npos);
  CHECK(e.find("column") != std::string::npos);
  CHECK(error_of("[1, 2]").find("top level") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/file.json"), ConfigError);
}

TEST_CASE("tolerance overrides") {
  RunConfig rc = parse_config(read("short.json"));
  apply_tolerance_override(rc, "h_mismatch=0.1");
  CHECK(rc.tol.at("h_mismatch") == 0.1);
  apply_tolerance_override(rc, "oracle=2e-9");
  CHECK(rc.tol.at("oracle") == 2e-9);
  CHECK_THROWS_WITH_AS(apply_tolerance_override(rc, "speed=1"), doctest::Contains("unknown tolerance"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(rc, "oracle"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(rc, "oracle=abc"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(rc, "oracle=-1"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(rc, "=1"), ConfigError);

  const auto t = default_tolerances();
  CHECK(t.at("oracle") == 1e-9);
  CHECK(t.at("consistency") == 1e-8);
  CHECK(t.at("h_mismatch") == 0.05);
  CHECK(t.at("generic_M_dE") == 1e-12);
  CHECK(t.at("generic_defect") == 1e-8);
  CHECK(t.at("generic_order") == 2.0);
  CHECK(t.at("lsi_gap") == 1e-8);
}
