#include "kgen/quadrature.hpp"
#include "kgen/species_kernel.hpp"

#include <doctest.h>

#include <random>

using namespace kgen;

namespace {

Velocity vec(double x, double y) {
  Velocity v(2);
  v << x, y;
  return v;
}

Velocity vec(double x, double y, double z) {
  Velocity v(3);
  v << x, y, z;
  return v;
}

// componentwise transcription, no Eigen expressions
void scalar_post(const double* vi, const double* vj, const double* w, double mi, double mj, int d,
                 double* a, double* b) {
  double r2 = 0;
  for (int k = 0; k < d; ++k) r2 += (vi[k] - vj[k]) * (vi[k] - vj[k]);
  const double r = std::sqrt(r2);
  for (int k = 0; k < d; ++k) {
    const double c = (mi * vi[k] + mj * vj[k]) / (mi + mj);
    a[k] = c + mj / (mi + mj) * r * w[k];
    b[k] = c - mi / (mi + mj) * r * w[k];
  }
}

}  // namespace

TEST_CASE("species set validates masses and flags") {
  CHECK_THROWS_AS(SpeciesSet({1.0, -1.0}, {Statistics::maxwell, Statistics::maxwell}), PreconditionError);
  CHECK_THROWS_AS(SpeciesSet({}, {}), PreconditionError);
  CHECK_THROWS_AS(statistics_from_alpha(2), PreconditionError);
  SpeciesSet s({1.0, 4.0}, {Statistics::fermi, Statistics::bose});
  CHECK(s.alpha(0) == -1);
  CHECK(s.alpha(1) == 1);
  CHECK(s.mass(1) == 4.0);
}

TEST_CASE("post_collision head-on swap") {
  auto [a, b] = post_collision(vec(1, 0), vec(-1, 0), vec(0, 1), 1.0, 1.0);
  CHECK(a(0) == doctest::Approx(0.0));
  CHECK(a(1) == doctest::Approx(1.0));
  CHECK(b(0) == doctest::Approx(0.0));
  CHECK(b(1) == doctest::Approx(-1.0));
}

TEST_CASE("post_collision identity when omega follows the relative velocity") {
  Velocity vi = vec(0.3, -1.2), vj = vec(-0.7, 0.4);
  Velocity w = (vi - vj).normalized();
  auto [a, b] = post_collision(vi, vj, w, 1.5, 0.5);
  CHECK((a - vi).norm() < 1e-14);
  CHECK((b - vj).norm() < 1e-14);
}

TEST_CASE("post_collision unequal masses against scalar transcription") {
  auto [a, b] = post_collision(vec(1, 0), vec(0, 0), vec(0, 1), 2.0, 1.0);
  // frozen from the scalar transcription
  CHECK(a(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(a(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(b(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(b(1) == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
  const double p = 2.0 * a(0) + b(0), e = 2.0 * a.squaredNorm() + b.squaredNorm();
  CHECK(std::abs(p - 2.0) < 1e-15);
  CHECK(std::abs(e - 2.0) < 1e-15);
}

TEST_CASE("post_collision preconditions") {
  CHECK_THROWS_AS(post_collision(vec(1, 0), vec(0, 0), vec(0, 2), 1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(post_collision(vec(1, 0), vec(0, 0), vec(0, 1), 0.0, 1.0), PreconditionError);
  auto [a, b] = post_collision(vec(0.5, 0.5), vec(0.5, 0.5), vec(1, 0), 1.0, 2.0);
  CHECK(a == vec(0.5, 0.5));
  CHECK(b == vec(0.5, 0.5));
}

TEST_CASE("post_collision properties on random inputs") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> N(0.0, 2.0);
  std::uniform_real_distribution<double> M(0.1, 10.0);
  for (int d : {2, 3}) {
    for (int t = 0; t < 2000; ++t) {
      Velocity vi(d), vj(d), w(d);
      for (int k = 0; k < d; ++k) {
        vi(k) = N(rng);
        vj(k) = N(rng);
        w(k) = N(rng);
      }
      w.normalize();
      const double mi = M(rng), mj = M(rng);
      auto [a, b] = post_collision(vi, vj, w, mi, mj);
      const Velocity p0 = mi * vi + mj * vj;
      const double e0 = mi * vi.squaredNorm() + mj * vj.squaredNorm();
      CHECK((mi * a + mj * b - p0).norm() <= 1e-12 * std::max(1.0, p0.norm() + mi * vi.norm() + mj * vj.norm()));
      CHECK(std::abs(mi * a.squaredNorm() + mj * b.squaredNorm() - e0) <= 1e-12 * e0);
      CHECK(std::abs((a - b).norm() - (vi - vj).norm()) <= 1e-12 * (vi - vj).norm());

      double sa[3], sb[3];
      scalar_post(vi.data(), vj.data(), w.data(), mi, mj, d, sa, sb);
      for (int k = 0; k < d; ++k) {
        CHECK(a(k) == doctest::Approx(sa[k]).epsilon(1e-13));
        CHECK(b(k) == doctest::Approx(sb[k]).epsilon(1e-13));
      }

      // reversibility: the original relative direction maps the primed pair back
      const Velocity back = (vi - vj).normalized();
      auto [a2, b2] = post_collision(a, b, back, mi, mj);
      CHECK((a2 - vi).norm() <= 1e-10 * (1 + vi.norm()));
      CHECK((b2 - vj).norm() <= 1e-10 * (1 + vj.norm()));
    }
  }
}

TEST_CASE("deviation_angle") {
  CHECK(deviation_angle(vec(1, 0), vec(0, 0), vec(1, 0)) == doctest::Approx(0.0));
  CHECK(deviation_angle(vec(1, 0), vec(0, 0), vec(0, 1)) == doctest::Approx(pi / 2));
  CHECK(deviation_angle(vec(1, 1), vec(0, 0), vec(1, 0)) == doctest::Approx(pi / 4));
  CHECK_THROWS_WITH_AS(deviation_angle(vec(1, 1), vec(1, 1), vec(1, 0)), "undefined deviation angle",
                       PreconditionError);
  // nearly aligned: clamped, not NaN
  const double t = deviation_angle(vec(1e8, 1), vec(0, 0), vec(1, 1e-8));
  CHECK(std::isfinite(t));
}

TEST_CASE("kernel_B and kernel_A") {
  PairKernel mm(maxwell_radial(1.0), constant_angular(0.7));
  for (double r : {0.0, 0.5, 3.0}) CHECK(kernel_B(mm, r, pi / 4) == doctest::Approx(0.7));
  CHECK(kernel_B(mm, 1.0, 3 * pi / 4) == 0.0);
  PairKernel pl(power_law_radial(1.0, 1.0), cosine_angular(1.0));
  CHECK(kernel_B(pl, 2.0, pi / 3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(kernel_B(pl, -1.0, 0.1), PreconditionError);

  CHECK(kernel_A(mm, 0.0, 1.0) == 0.0);
  CHECK(kernel_A(mm, 3.0, 2.0) == doctest::Approx(4.5));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.1, 5.0);
  for (int t = 0; t < 100; ++t) {
    const double r = U(rng), mi = U(rng), mj = U(rng);
    CHECK(std::abs(mi * kernel_A(pl, r, mi) - mj * kernel_A(pl, r, mj)) <= 1e-12 * r * r * r);
  }
}

TEST_CASE("kernel set is symmetric by construction") {
  KernelSet ks(3, PairKernel(maxwell_radial(1.0), constant_angular(1.0)));
  ks.set(0, 2, PairKernel(power_law_radial(2.0, 1.0), constant_angular(0.5)));
  CHECK(&ks(0, 2) == &ks(2, 0));
  CHECK(kernel_B(ks(2, 0), 1.5, 0.3) == kernel_B(ks(0, 2), 1.5, 0.3));
  KernelSet empty(2);
  CHECK_THROWS_AS(empty(0, 1), PreconditionError);
}

TEST_CASE("radial factors") {
  auto tab = tabulated_radial({{0.0, 1.0}, {1.0, 3.0}, {2.0, 3.0}});
  CHECK(tab.value(0.5) == doctest::Approx(2.0));
  CHECK(tab.value(5.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(tabulated_radial({{0.0, 1.0}}), PreconditionError);
  auto e = exponential_radial(1.0, 1.0);
  CHECK(e.value(2.0) == doctest::Approx(std::exp(2.0)));
}

TEST_CASE("sphere areas") {
  CHECK(sphere_area(0) == doctest::Approx(2.0));
  CHECK(sphere_area(1) == doctest::Approx(2 * pi));
  CHECK(sphere_area(2) == doctest::Approx(4 * pi));
}

TEST_CASE("grazing family normalisation") {
  SpeciesSet one({1.0, 1.0}, {Statistics::maxwell, Statistics::maxwell});
  GrazingFamily fam([](double t) { return std::sin(2 * t) * std::sin(2 * t); }, 2, one);
  // d = 2, equal unit masses
  CHECK(fam.target_moment(0, 1) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(fam.second_moment(0, 1) == doctest::Approx(4.0).epsilon(1e-10));

  SpeciesSet two({1.0, 3.0}, {Statistics::maxwell, Statistics::fermi});
  GrazingFamily f2([](double t) { return 1.0 + t; }, 2, two);
  for (double eps : {0.8, 0.4, 0.2}) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double ratio = f2.second_moment(i, j, eps) / f2.second_moment(i, j);
        CHECK(std::abs(ratio - 1.0) <= 1e-6);
      }
    CHECK(scaled_angular(f2, 0, 1, eps, 0.51 * eps) == 0.0);
    CHECK(scaled_angular(f2, 0, 1, eps, 0.49 * eps) > 0.0);
  }
  CHECK_THROWS_AS(scaled_angular(f2, 0, 1, 1.0, 0.1), PreconditionError);
  CHECK_THROWS_AS(scaled_angular(f2, 0, 1, 0.0, 0.1), PreconditionError);

  GrazingFamily f3([](double t) { return std::sin(t); }, 3, two);
  const double target = 2.0 * 2 / (2 * pi) * 16.0 / 9.0;
  CHECK(f3.target_moment(0, 1) == doctest::Approx(target).epsilon(1e-14));
  CHECK(f3.second_moment(0, 1, 0.4) == doctest::Approx(target).epsilon(1e-6));
}

TEST_CASE("assumption check") {
  std::vector<double> rs;
  for (int k = 1; k <= 100; ++k) rs.push_back(0.1 * k);
  PairKernel mm(maxwell_radial(2.0), constant_angular(1.0));
  auto a = assumption_check(mm, 1e-6, rs);
  CHECK(a.holds);
  CHECK(a.worst_ratio == 0.0);

  PairKernel pl(power_law_radial(1.0, 1.5), constant_angular(1.0));
  auto b = assumption_check(pl, 0.5, rs);
  CHECK(b.worst_ratio == doctest::Approx(1.5).epsilon(1e-9));
  CHECK_FALSE(b.holds);  // 2 sqrt(0.5) < 1.5
  CHECK(b.threshold == doctest::Approx(2 * std::sqrt(0.5)));
  CHECK(assumption_check(pl, 0.6, rs).holds);

  PairKernel ex(exponential_radial(1.0, 1.0), constant_angular(1.0));
  auto e = assumption_check(ex, 24.0, rs);
  CHECK(e.worst_ratio == doctest::Approx(10.0).epsilon(1e-5));
  CHECK_FALSE(e.holds);
  CHECK(assumption_check(ex, 25.5, rs).holds);

  set_warnings_enabled(false);
  PairKernel z(power_law_radial(1.0, 1.0), constant_angular(1.0));
  auto zr = assumption_check(z, 1.0, {0.0, 1.0});
  CHECK(zr.indeterminate == 1);
  set_warnings_enabled(true);
}
