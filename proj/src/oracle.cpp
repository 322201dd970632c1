#include "kgen/oracle.hpp"

#include "kgen/entropy.hpp"

#include <cmath>
#include <ostream>
#include <random>

namespace kgen {

namespace {

// Lagrange weights through base..base+3 written as explicit products.
struct Stencil {
  bool inside = false;
  int base = 0;
  double w[4] = {0, 0, 0, 0};
};

Stencil stencil_at(const VelocityGrid& g, double x) {
  Stencil s;
  const double L = g.half_width();
  if (x < -L || x > L) return s;
  const int n = g.points();
  const double u = (x + L) / g.spacing() - 0.5;  // fractional node index
  s.base = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, n - 4);
  for (int p = 0; p < 4; ++p) {
    double w = 1.0;
    for (int m = 0; m < 4; ++m)
      if (m != p) w *= (u - (s.base + m)) / static_cast<double>(p - m);
    s.w[p] = w;
  }
  s.inside = true;
  return s;
}

struct Point {
  bool inside = false;
  Stencil ax[2];
};

Point locate(const VelocityGrid& g, const Velocity& v) {
  Point p;
  p.ax[0] = stencil_at(g, v(0));
  p.ax[1] = stencil_at(g, v(1));
  p.inside = p.ax[0].inside && p.ax[1].inside;
  return p;
}

double sample(const VelocityGrid& g, const Eigen::VectorXd& f, const Point& p) {
  const int n = g.points();
  double s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      s += p.ax[0].w[a] * p.ax[1].w[b] * f((p.ax[0].base + a) * n + p.ax[1].base + b);
  return s;
}

void deposit(const VelocityGrid& g, Eigen::Ref<Eigen::VectorXd> q, const Point& p, double c) {
  const int n = g.points();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      q((p.ax[0].base + a) * n + p.ax[1].base + b) += c * p.ax[0].w[a] * p.ax[1].w[b];
}

double gain_loss(double fa, double fb, double fap, double fbp, int ai, int aj) {
  return fap * fbp * (1.0 + ai * fa) * (1.0 + aj * fb) - fa * fb * (1.0 + ai * fap) * (1.0 + aj * fbp);
}

// Visits every retained sample: fn(i, j, a, b, weight, Pa', Pb')
template <typename Fn>
void for_samples(const VelocityGrid& g, const SpeciesSet& species, const KernelSet& kernels,
                 const SphereQuadrature& squad, Fn&& fn) {
  require(g.dim() == 2 && squad.dim == 2, "oracle: d = 2 only");
  const int N = species.size();
  const double hd = g.cell_volume();
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const PairKernel& kern = kernels(i, j);
      const double mi = species.mass(i), mj = species.mass(j);
      for (Eigen::Index a = 0; a < g.size(); ++a)
        for (Eigen::Index b = 0; b < g.size(); ++b) {
          if (a == b) continue;
          const Velocity va = g.node(a), vb = g.node(b);
          const Velocity gv = va - vb;
          const double r = gv.norm();
          const double k0 = gv(0) / r, k1 = gv(1) / r;
          const double rad = kern.radial(r);
          for (Eigen::Index q = 0; q < squad.size(); ++q) {
            const double c = squad.nodes(0, q), s = squad.nodes(1, q);
            const double theta = std::acos(std::clamp(c, -1.0, 1.0));
            const double B = rad * kern.angular(theta);
            if (B == 0.0) continue;
            Velocity omega(2);
            omega << c * k0 - s * k1, c * k1 + s * k0;
            const auto [pa, pb] = post_collision(va, vb, omega, mi, mj);
            const Point Pa = locate(g, pa), Pb = locate(g, pb);
            if (!Pa.inside || !Pb.inside) continue;
            fn(i, j, a, b, hd * hd * B * squad.weights(q), Pa, Pb);
          }
        }
    }
}

double upper(const SpeciesSet& sp, int i) { return sp.alpha(i) == -1 ? 1.0 : HUGE_VAL; }

// Row k of the one-dimensional derivative: five-point stencil solved from the
// moment conditions, centred inside and one-sided on the two outer layers.
Eigen::MatrixXd derivative_1d(int n, double h) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const int first = std::clamp(k - 2, 0, n - 5);
    Eigen::MatrixXd V(5, 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(5);
    for (int p = 0; p < 5; ++p) {
      const double x = first + p - k;
      for (int m = 0; m < 5; ++m) V(m, p) = std::pow(x, m);
    }
    rhs(1) = 1.0;
    const Eigen::VectorXd w = V.fullPivLu().solve(rhs);
    for (int p = 0; p < 5; ++p) D(k, first + p) = w(p) / h;
  }
  return D;
}

struct LandauPieces {
  std::vector<Eigen::MatrixXd> grad;  // per axis, size x size
};

LandauPieces landau_pieces(const VelocityGrid& g) {
  require(g.dim() == 2, "oracle: d = 2 only");
  const int n = g.points();
  const Eigen::MatrixXd D = derivative_1d(n, g.spacing());
  LandauPieces lp;
  // flat index k0 n + k1
  Eigen::MatrixXd G0 = Eigen::MatrixXd::Zero(g.size(), g.size());
  Eigen::MatrixXd G1 = Eigen::MatrixXd::Zero(g.size(), g.size());
  for (int a0 = 0; a0 < n; ++a0)
    for (int a1 = 0; a1 < n; ++a1)
      for (int b = 0; b < n; ++b) {
        G0(a0 * n + a1, b * n + a1) = D(a0, b);
        G1(a0 * n + a1, a0 * n + b) = D(a1, b);
      }
  lp.grad = {G0, G1};
  return lp;
}

Eigen::MatrixXd log_ratio(const Mixture& F, const SpeciesSet& species) {
  Eigen::MatrixXd out(F.values.rows(), F.values.cols());
  for (int i = 0; i < species.size(); ++i) {
    const double top = F.values.col(i).maxCoeff();
    for (Eigen::Index k = 0; k < F.values.rows(); ++k) {
      if (!(top > 0)) {
        out(k, i) = 0.0;
        continue;
      }
      const double f = std::max(F.values(k, i), density_floor * top);
      out(k, i) = std::log(f) - std::log(std::max(1.0 + species.alpha(i) * f, density_floor));
    }
  }
  return out;
}

// per species: size x 2 matrix of grad(x_i) / m_i
std::vector<Eigen::MatrixXd> scaled_gradients(const LandauPieces& lp, const Eigen::MatrixXd& x,
                                              const SpeciesSet& sp) {
  std::vector<Eigen::MatrixXd> out;
  for (int i = 0; i < sp.size(); ++i) {
    Eigen::MatrixXd G(x.rows(), 2);
    G.col(0) = lp.grad[0] * x.col(i) / sp.mass(i);
    G.col(1) = lp.grad[1] * x.col(i) / sp.mass(i);
    out.push_back(G);
  }
  return out;
}

Eigen::VectorXd occupancy_col(const Mixture& F, const SpeciesSet& sp, int i) {
  return F.values.col(i).array() * (1.0 + sp.alpha(i) * F.values.col(i).array());
}

Eigen::Matrix2d projector(const Velocity& g) {
  const double r2 = g.squaredNorm();
  Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
  P -= Eigen::Vector2d(g(0), g(1)) * Eigen::Vector2d(g(0), g(1)).transpose() / r2;
  return P;
}

}  // namespace

double oracle_weak_boltzmann(const Mixture& F, const Eigen::MatrixXd& phi, const SpeciesSet& species,
                             const KernelSet& kernels, const SphereQuadrature& squad) {
  validate(F, species);
  const VelocityGrid& g = F.grid;
  double total = 0.0;
  for_samples(g, species, kernels, squad, [&](int i, int j, Eigen::Index a, Eigen::Index b, double w,
                                              const Point& Pa, const Point& Pb) {
    const double fa = F.values(a, i), fb = F.values(b, j);
    const double fap = std::clamp(sample(g, F.values.col(i), Pa), 0.0, upper(species, i));
    const double fbp = std::clamp(sample(g, F.values.col(j), Pb), 0.0, upper(species, j));
    const double bar = sample(g, phi.col(i), Pa) + sample(g, phi.col(j), Pb) - phi(a, i) - phi(b, j);
    total += w * bar * gain_loss(fa, fb, fap, fbp, species.alpha(i), species.alpha(j));
  });
  return -0.25 * total;
}

Eigen::MatrixXd oracle_q_boltzmann(const Mixture& F, const SpeciesSet& species,
                                   const KernelSet& kernels, const SphereQuadrature& squad) {
  validate(F, species);
  const VelocityGrid& g = F.grid;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(g.size(), species.size());
  const double hd = g.cell_volume();
  for_samples(g, species, kernels, squad, [&](int i, int j, Eigen::Index a, Eigen::Index b, double w,
                                              const Point& Pa, const Point& Pb) {
    const double fa = F.values(a, i), fb = F.values(b, j);
    const double fap = std::clamp(sample(g, F.values.col(i), Pa), 0.0, upper(species, i));
    const double fbp = std::clamp(sample(g, F.values.col(j), Pb), 0.0, upper(species, j));
    const double c = -0.25 * w / hd * gain_loss(fa, fb, fap, fbp, species.alpha(i), species.alpha(j));
    deposit(g, q.col(i), Pa, c);
    deposit(g, q.col(j), Pb, c);
    q(a, i) -= c;
    q(b, j) -= c;
  });
  return q;
}

double oracle_dissipation_boltzmann(const Mixture& F, const SpeciesSet& species,
                                    const KernelSet& kernels, const SphereQuadrature& squad) {
  validate(F, species);
  const VelocityGrid& g = F.grid;
  std::vector<double> fl(species.size());
  for (int i = 0; i < species.size(); ++i) fl[i] = density_floor * F.values.col(i).maxCoeff();
  double total = 0.0;
  for_samples(g, species, kernels, squad, [&](int i, int j, Eigen::Index a, Eigen::Index b, double w,
                                              const Point& Pa, const Point& Pb) {
    const double fa = F.values(a, i), fb = F.values(b, j);
    const double fap = std::clamp(sample(g, F.values.col(i), Pa), 0.0, upper(species, i));
    const double fbp = std::clamp(sample(g, F.values.col(j), Pb), 0.0, upper(species, j));
    if (fa <= fl[i] || fap <= fl[i] || fb <= fl[j] || fbp <= fl[j]) return;
    const int ai = species.alpha(i), aj = species.alpha(j);
    const double A = fap * fbp * (1 + ai * fa) * (1 + aj * fb);
    const double Bv = fa * fb * (1 + ai * fap) * (1 + aj * fbp);
    if (!(A > 0) || !(Bv > 0)) return;
    total += w * (A - Bv) * std::log(A / Bv);
  });
  return 0.25 * total;
}

Eigen::MatrixXd oracle_q_landau(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels) {
  validate(F, species);
  const VelocityGrid& g = F.grid;
  const LandauPieces lp = landau_pieces(g);
  const int N = species.size();
  const auto X = scaled_gradients(lp, log_ratio(F, species), species);
  std::vector<Eigen::VectorXd> u(N);
  for (int i = 0; i < N; ++i) u[i] = occupancy_col(F, species, i);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(g.size(), N);
  const double hd = g.cell_volume();
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd flux = Eigen::MatrixXd::Zero(g.size(), 2);
    for (int j = 0; j < N; ++j)
      for (Eigen::Index a = 0; a < g.size(); ++a)
        for (Eigen::Index b = 0; b < g.size(); ++b) {
          if (a == b) continue;
          const Velocity gv = g.node(a) - g.node(b);
          const double r = gv.norm();
          const double K = r * r * kernels(i, j).radial(r);
          const Eigen::Vector2d Wi = u[i](a) * X[i].row(a).transpose();
          const Eigen::Vector2d Wj = u[j](b) * X[j].row(b).transpose();
          const Eigen::Vector2d z = projector(gv) * (u[j](b) * Wi - u[i](a) * Wj);
          flux.row(a) += hd * K * z.transpose();
        }
    // divergence as minus the transpose of the gradient
    q.col(i) = -(lp.grad[0].transpose() * flux.col(0) + lp.grad[1].transpose() * flux.col(1)) /
               species.mass(i);
  }
  return q;
}

double oracle_weak_landau(const Mixture& F, const Eigen::MatrixXd& phi, const SpeciesSet& species,
                          const KernelSet& kernels) {
  validate(F, species);
  const VelocityGrid& g = F.grid;
  const LandauPieces lp = landau_pieces(g);
  const int N = species.size();
  const auto X = scaled_gradients(lp, log_ratio(F, species), species);
  const auto P = scaled_gradients(lp, phi, species);
  std::vector<Eigen::VectorXd> u(N);
  for (int i = 0; i < N; ++i) u[i] = occupancy_col(F, species, i);
  double total = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (Eigen::Index a = 0; a < g.size(); ++a)
        for (Eigen::Index b = 0; b < g.size(); ++b) {
          if (a == b) continue;
          const Velocity gv = g.node(a) - g.node(b);
          const double r = gv.norm();
          const double K = r * r * kernels(i, j).radial(r);
          const Eigen::Vector2d z =
              u[i](a) * u[j](b) * (X[i].row(a) - X[j].row(b)).transpose();
          const Eigen::Vector2d p = (P[i].row(a) - P[j].row(b)).transpose();
          total += K * z.dot(projector(gv) * p);
        }
  const double hd = g.cell_volume();
  return -0.5 * hd * hd * total;
}

double oracle_dissipation_landau(const Mixture& F, const SpeciesSet& species,
                                 const KernelSet& kernels) {
  validate(F, species);
  const VelocityGrid& g = F.grid;
  const LandauPieces lp = landau_pieces(g);
  const int N = species.size();
  const auto X = scaled_gradients(lp, log_ratio(F, species), species);
  std::vector<Eigen::VectorXd> u(N);
  std::vector<double> fl(N);
  for (int i = 0; i < N; ++i) {
    u[i] = occupancy_col(F, species, i);
    fl[i] = density_floor * F.values.col(i).maxCoeff();
  }
  double total = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (Eigen::Index a = 0; a < g.size(); ++a)
        for (Eigen::Index b = 0; b < g.size(); ++b) {
          if (a == b || u[i](a) <= fl[i] || u[j](b) <= fl[j]) continue;
          const Velocity gv = g.node(a) - g.node(b);
          const double r = gv.norm();
          const double K = r * r * kernels(i, j).radial(r);
          const Eigen::Vector2d z = projector(gv) * (X[i].row(a) - X[j].row(b)).transpose();
          total += K * u[i](a) * u[j](b) * z.squaredNorm();
        }
  const double hd = g.cell_volume();
  return 0.5 * hd * hd * total;
}

namespace {

struct Case {
  std::string name;
  int n;
  double L;
  std::vector<double> masses;
  std::vector<Statistics> stats;
  KernelSet kernels;
  int K;
};

Mixture random_state(const VelocityGrid& g, const SpeciesSet& sp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::MatrixXd v(g.size(), sp.size());
  for (int i = 0; i < sp.size(); ++i) {
    v.col(i).setZero();
    for (int c = 0; c < 2; ++c) {
      Velocity u(2);
      u << 0.8 * U(rng), 0.8 * U(rng);
      const double T = 0.6 + 0.3 * U(rng);
      const double w = 1.0 + 0.4 * U(rng);
      for (Eigen::Index k = 0; k < g.size(); ++k)
        v(k, i) += w * std::exp(-0.5 * sp.mass(i) * (g.node(k) - u).squaredNorm() / T);
    }
    if (sp.alpha(i) == -1) v.col(i) *= 0.8 / v.col(i).maxCoeff();
  }
  return {g, v};
}

Eigen::MatrixXd random_test(const VelocityGrid& g, int N, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::MatrixXd phi(g.size(), N);
  for (int i = 0; i < N; ++i) {
    const double a = U(rng), b = U(rng), c = U(rng), s = 1.5 + 0.5 * U(rng);
    Velocity m(2);
    m << 0.5 * U(rng), 0.5 * U(rng);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      const Velocity v = g.node(k);
      phi(k, i) = (1.0 + a * v(0) + b * v(1) + c * v(0) * v(1)) *
                  std::exp(-0.5 * (v - m).squaredNorm() / (s * s));
    }
  }
  return phi;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(b), 1e-300);
  return std::abs(a - b) / s;
}

double rel_max(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double s = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / s;
}

double consistency(const VelocityGrid& g, const Eigen::MatrixXd& q, const Eigen::MatrixXd& phi,
                   double weak) {
  const double hd = g.cell_volume();
  const double strong = hd * (q.array() * phi.array()).sum();
  const double scale = hd * (q.array() * phi.array()).abs().sum();
  return std::abs(strong - weak) / std::max(scale, 1e-300);
}

}  // namespace

OracleSuite run_oracle_suite(std::uint64_t seed, const OracleTolerances& tol, int max_n) {
  require(max_n >= 8, "oracle suite: grids need n >= 8");
  std::vector<Case> cases;
  cases.push_back({"maxwell-fermi", 8, 4.0, {1.0, 2.0}, {Statistics::maxwell, Statistics::fermi},
                   KernelSet(2, PairKernel(power_law_radial(1.0, 1.0), cosine_angular(1.0 / pi))), 16});
  cases.push_back({"bose-maxwell", std::min(max_n, 16) & ~1, 5.0, {1.0, 3.0},
                   {Statistics::bose, Statistics::maxwell},
                   KernelSet(2, PairKernel(maxwell_radial(1.0), constant_angular(1.0 / pi))), 16});
  cases.push_back({"fermi-single", std::min(max_n, 12) & ~1, 4.0, {1.0}, {Statistics::fermi},
                   KernelSet(1, PairKernel(power_law_radial(0.5, 0.5), constant_angular(1.0 / pi))), 12});

  OracleSuite suite;
  std::mt19937_64 rng(seed);
  auto add = [&](const std::string& name, double value, double t) {
    const bool ok = std::isfinite(value) && value <= t;
    suite.checks.push_back({name, value, t, ok});
    suite.pass = suite.pass && ok;
  };
  for (const Case& c : cases) {
    const VelocityGrid g = build_grid(2, c.n, c.L);
    const SpeciesSet sp(c.masses, c.stats);
    const SphereQuadrature squad = sphere_quadrature(2, c.K);
    const Mixture F = random_state(g, sp, rng);
    const Eigen::MatrixXd phi = random_test(g, sp.size(), rng);

    const BoltzmannOperator B(sp, c.kernels, g, squad);
    const Eigen::MatrixXd qB = B.q_total(F).q;
    const Eigen::MatrixXd qBo = oracle_q_boltzmann(F, sp, c.kernels, squad);
    const double wB = B.weak_form(F, phi), wBo = oracle_weak_boltzmann(F, phi, sp, c.kernels, squad);
    add(c.name + ".boltzmann.Q", rel_max(qB, qBo), tol.oracle);
    add(c.name + ".boltzmann.weak", rel(wB, wBo), tol.oracle);
    add(c.name + ".boltzmann.D",
        rel(B.dissipation(F), oracle_dissipation_boltzmann(F, sp, c.kernels, squad)), tol.oracle);
    add(c.name + ".boltzmann.weak_strong", consistency(g, qB, phi, wB), tol.consistency);
    add(c.name + ".boltzmann.oracle_weak_strong", consistency(g, qBo, phi, wBo), tol.consistency);

    const LandauOperator L(sp, c.kernels, g);
    const Eigen::MatrixXd qL = L.q_total(F).q;
    const Eigen::MatrixXd qLo = oracle_q_landau(F, sp, c.kernels);
    const double wL = L.weak_form(F, phi), wLo = oracle_weak_landau(F, phi, sp, c.kernels);
    add(c.name + ".landau.Q", rel_max(qL, qLo), tol.oracle);
    add(c.name + ".landau.weak", rel(wL, wLo), tol.oracle);
    add(c.name + ".landau.D", rel(L.dissipation(F), oracle_dissipation_landau(F, sp, c.kernels)),
        tol.oracle);
    add(c.name + ".landau.weak_strong", consistency(g, qL, phi, wL), tol.consistency);
    add(c.name + ".landau.oracle_weak_strong", consistency(g, qLo, phi, wLo), tol.consistency);
  }
  return suite;
}

void write_oracle_csv(std::ostream& os, const OracleSuite& suite) {
  const auto old = os.precision(17);
  os << "check,value,tol,pass\n";
  for (const auto& c : suite.checks)
    os << c.name << ',' << c.value << ',' << c.tol << ',' << (c.pass ? 1 : 0) << '\n';
  os.precision(old);
}

}  // namespace kgen
