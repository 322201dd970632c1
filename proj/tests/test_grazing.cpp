#include "kgen/experiments.hpp"
#include "kgen/grazing.hpp"

#include <doctest.h>

#include <sstream>

using namespace kgen;

namespace {

Velocity vec(double x, double y) {
  Velocity v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST_CASE("fitted order") {
  std::vector<double> h{0.4, 0.2, 0.1}, e;
  for (double x : h) e.push_back(3.0 * x * x * x);
  CHECK(fitted_order(h, e) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(fitted_order({0.1}, {1.0}), PreconditionError);
}

TEST_CASE("smooth test functions") {
  const SmoothFunction f = gaussian_poly(vec(0.3, -0.2), 0.9, 1.5, vec(0.4, 0.1));
  const Velocity v = vec(0.7, 0.4);
  const double h = 1e-5;
  for (int a = 0; a < 2; ++a) {
    Velocity e = Velocity::Zero(2);
    e(a) = h;
    CHECK(f.grad(v)(a) == doctest::Approx((f.value(v + e) - f.value(v - e)) / (2 * h)).epsilon(1e-8));
    const Velocity dg = (f.grad(v + e) - f.grad(v - e)) / (2 * h);
    for (int b = 0; b < 2; ++b) CHECK(f.hess(v)(b, a) == doctest::Approx(dg(b)).epsilon(1e-7));
  }
  VelocityGrid g = build_grid(2, 8, 3.0);
  auto bat = test_battery(g, 3);
  CHECK(bat.size() == 3);
  CHECK(bat[0].cols() == 3);
}

TEST_CASE("angular resolution per scale") {
  for (double eps : {0.8, 0.4, 0.2, 0.1, 0.05}) {
    const int K = grazing_nodes(eps);
    CHECK(K >= 64 / eps);
    CHECK(K % 2 == 0);
    int support = 0;
    for (int q = 0; q < K; ++q) {
      const double t = 2 * pi * (q + 0.5) / K;
      const double angle = std::min(t, 2 * pi - t);
      if (angle <= eps / 2) ++support;
    }
    CHECK(support >= 16);
  }
  CHECK_THROWS_AS(grazing_nodes(1.2), PreconditionError);
  CHECK_THROWS_AS(grazing_nodes(0.0), PreconditionError);
}

TEST_CASE("grazing sweep approaches the Landau weak form") {
  // needs the reference resolution: on coarser grids the interpolant's kinks dominate small eps
  RunConfig rc = load_config(std::string(KGEN_CONFIG_DIR) + "/reference.json");
  const SpeciesSet sp = rc.sim.species();
  const Mixture F = initial_state(rc.sim);
  const GrazingFamily fam(grazing_base("sin2"), 2, sp);
  const RadialFactor radial = maxwell_radial(1.0);
  GrazingTable t = grazing_sweep(F, sp, fam, radial, {0.8, 0.4, 0.2, 0.1}, test_battery(F.grid, 2));
  REQUIRE(t.rows.size() == 4);
  CHECK(t.strictly_decreasing);
  CHECK(t.rows.back().relative <= 0.05);
  for (const auto& r : t.rows) CHECK(r.landau == doctest::Approx(t.rows[0].landau).epsilon(1e-14));

  // collision invariants are annihilated at every scale
  for (const auto& inv : collision_invariants(F.grid, sp)) {
    GrazingTable z = grazing_sweep(F, sp, fam, radial, {0.8, 0.2}, {inv});
    for (const auto& r : z.rows) {
      CHECK(std::abs(r.boltzmann) <= 1e-10 * inv.cwiseAbs().maxCoeff());
      CHECK(std::abs(r.landau) <= 1e-10 * inv.cwiseAbs().maxCoeff());
    }
  }
  std::ostringstream os;
  write_grazing_csv(os, t);
  CHECK(os.str().rfind("eps,", 0) == 0);
  CHECK_THROWS_AS(grazing_sweep(F, sp, fam, radial, {1.5}, test_battery(F.grid, 2)), PreconditionError);
}

TEST_CASE("small-angle lemma") {
  const SmoothFunction phi_i = gaussian_poly(vec(0.3, -0.2), 1.1, 1.0, vec(0.5, 0.1));
  const SmoothFunction phi_j = gaussian_poly(vec(-0.4, 0.6), 0.9, 0.7, vec(-0.2, 0.3));
  const SmoothFunction f_i = gaussian_poly(vec(0, 0), 1.0, 0.3, vec(0.5, 0.1));
  const SmoothFunction f_j = gaussian_poly(vec(0.3, -0.2), 1.2, 0.4, vec(-0.2, 0.3));
  for (auto [ai, aj] : std::vector<std::pair<int, int>>{{0, 0}, {1, -1}, {-1, -1}, {1, 0}}) {
    LemmaTable t = grazing_lemma_check({1e-1, 1e-2, 1e-3}, phi_i, phi_j, f_i, f_j, vec(0.7, 0.2),
                                       vec(-0.3, 0.5), 1.0, 2.0, ai, aj);
    INFO("alpha " << ai << " " << aj);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.order >= 1.0);
    CHECK(t.rows[2].residual < t.rows[0].residual);
    CHECK(std::abs(t.rows[2].rhs) > 0);
    CHECK(t.rows[2].residual <= 0.01 * std::abs(t.rows[2].rhs));
  }
  CHECK_THROWS_WITH_AS(grazing_lemma_check({0.1}, phi_i, phi_j, f_i, f_j, vec(1, 1), vec(1, 1), 1, 1, 0, 0),
                       "undefined deviation angle", PreconditionError);
}

TEST_CASE("perpendicular identity") {
  PerpTable t = perp_identity_check({1e-1, 1e-2, 1e-3}, vec(0.6, 0.8));
  REQUIRE(t.rows.size() == 3);
  for (const auto& r : t.rows) {
    CHECK(r.off_diagonal == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(std::abs(t.rows.back().coefficient - 2.0) <= 0.02);
  CHECK(t.order >= 1.0);
  std::ostringstream os;
  write_perp_csv(os, t);
  CHECK(!os.str().empty());
}

TEST_CASE("grazing driver") {
  RunConfig rc = load_config(std::string(KGEN_CONFIG_DIR) + "/short.json");
  rc.sim.n = 12;
  rc.grazing.eps = {0.8, 0.4};
  GrazingOutcome out = run_grazing(rc);
  REQUIRE(out.suites.size() == 3);
  CHECK(out.suites[1].pass);
  CHECK(out.suites[2].pass);
  CHECK(out.sweep.rows.size() == 2);
  CHECK_THROWS_AS(grazing_base("triangle"), PreconditionError);
  rc.grazing.eps = {1.2};
  CHECK_THROWS_AS(run_grazing(rc), PreconditionError);
}
