#include "kgen/grazing.hpp"

#include <cmath>
#include <ostream>

namespace kgen {

SmoothFunction gaussian_poly(const Velocity& c, double s, double a, const Velocity& p) {
  const double s2 = s * s;
  SmoothFunction fn;
  fn.value = [=](const Velocity& v) {
    return a * std::exp(-0.5 * (v - c).squaredNorm() / s2) * (1.0 + p.dot(v));
  };
  fn.grad = [=](const Velocity& v) {
    const Velocity x = v - c;
    const double g = a * std::exp(-0.5 * x.squaredNorm() / s2);
    const double poly = 1.0 + p.dot(v);
    return Velocity(g * (p - poly * x / s2));
  };
  fn.hess = [=](const Velocity& v) {
    const Velocity x = v - c;
    const int d = static_cast<int>(v.size());
    const double g = a * std::exp(-0.5 * x.squaredNorm() / s2);
    const double poly = 1.0 + p.dot(v);
    const Tensor I = Tensor::Identity(d, d);
    const Tensor xx = x * x.transpose();
    const Tensor px = p * x.transpose();
    return Tensor(g * (poly * (xx / (s2 * s2) - I / s2) - (px + px.transpose()) / s2));
  };
  return fn;
}

std::vector<Eigen::MatrixXd> test_battery(const VelocityGrid& grid, int species) {
  const int d = grid.dim();
  std::vector<Eigen::MatrixXd> out;
  for (int t = 0; t < 3; ++t) {
    Eigen::MatrixXd phi(grid.size(), species);
    for (int i = 0; i < species; ++i) {
      Velocity c = Velocity::Zero(d), p = Velocity::Zero(d);
      c(0) = 0.5 * (t - 1) + 0.25 * i;
      c(d - 1) = 0.3 * t - 0.2 * i;
      p(0) = 0.2 * (t + 1);
      p(d - 1) = -0.1 * (i + 1);
      const SmoothFunction fn = gaussian_poly(c, 1.2 + 0.2 * t, 1.0, p);
      for (Eigen::Index k = 0; k < grid.size(); ++k) phi(k, i) = fn.value(grid.node(k));
    }
    out.push_back(phi);
  }
  return out;
}

namespace {

int support_count(int K, double eps) {
  int c = 0;
  for (int q = 0; q < K; ++q) {
    const double phi = 2.0 * pi * (q + 0.5) / K;
    const double theta = std::min(phi, 2.0 * pi - phi);
    if (theta <= eps / 2) ++c;
  }
  return c;
}

}  // namespace

int grazing_nodes(double eps) {
  require(eps > 0 && eps < 1, "grazing scale must lie in (0,1)");
  int K = static_cast<int>(std::ceil(64.0 / eps));
  K += K % 2;
  while (support_count(K, eps) < 16) K += 2;
  return K;
}

GrazingTable grazing_sweep(const Mixture& F, const SpeciesSet& species, const GrazingFamily& family,
                           const RadialFactor& radial, const std::vector<double>& eps_list,
                           const std::vector<Eigen::MatrixXd>& battery) {
  require(F.grid.dim() == 2 && family.dim() == 2, "grazing_sweep: circle quadrature only (d = 2)");
  require(!eps_list.empty(), "grazing_sweep: empty scale list");
  require(!battery.empty(), "grazing_sweep: empty test battery");
  const int N = species.size();
  const KernelSet landau_kernels(N, PairKernel(radial, constant_angular(1.0)));
  const LandauOperator landau(species, landau_kernels, F.grid);
  std::vector<double> L;
  double l2 = 0.0;
  for (const auto& phi : battery) {
    L.push_back(landau.weak_form(F, phi));
    l2 += L.back() * L.back();
  }

  GrazingTable table;
  for (double eps : eps_list) {
    require(eps > 0 && eps < 1, "grazing scale must lie in (0,1)");
    GrazingRow row;
    row.eps = eps;
    row.K = grazing_nodes(eps);
    row.support_nodes = support_count(row.K, eps);
    if (row.support_nodes < 16) throw NumericalError("unresolved angular quadrature");
    const BoltzmannOperator op(species, family.scaled_kernels(eps, radial), F.grid,
                               sphere_quadrature(2, row.K));
    double g2 = 0.0;
    for (std::size_t t = 0; t < battery.size(); ++t) {
      const double b = op.weak_form(F, battery[t]);
      row.boltzmann += b;
      row.landau += L[t];
      g2 += (b - L[t]) * (b - L[t]);
    }
    row.gap = std::sqrt(g2);
    row.relative = l2 > 0 ? row.gap / std::sqrt(l2) : row.gap;
    if (!table.rows.empty() && !(row.gap < table.rows.back().gap)) table.strictly_decreasing = false;
    table.rows.push_back(row);
  }
  return table;
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  require(h.size() == err.size() && h.size() >= 2, "fitted_order: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double x = std::log(h[k]), y = std::log(std::max(err[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

LemmaTable grazing_lemma_check(const std::vector<double>& thetas, const SmoothFunction& phi_i,
                               const SmoothFunction& phi_j, const SmoothFunction& f_i,
                               const SmoothFunction& f_j, const Velocity& vi, const Velocity& vj,
                               double mi, double mj, int alpha_i, int alpha_j) {
  require(vi.size() == 2 && vj.size() == 2, "grazing_lemma_check: d = 2 only");
  const Velocity g = vi - vj;
  const double r = g.norm();
  if (r == 0.0) throw PreconditionError("undefined deviation angle");
  const Velocity k = g / r;
  Velocity gamma(2);
  gamma << -k(1), k(0);

  auto tau = [](int alpha, double f) { return 1.0 + alpha * f; };

  // limit: (mi mj / (mi + mj))^2 times
  //   2 r^2 grad~(tau_i tau_j) . Pi w  +  tau_i tau_j grad~ . (r^2 Pi w),
  // with w = grad phi_i / mi - grad phi_j / mj and grad~ = grad_i / mi - grad_j / mj
  const double mu = mi * mj / (mi + mj);
  const Tensor P = pi_projection(vi, vj);
  const double ti = tau(alpha_i, f_i.value(vi)), tj = tau(alpha_j, f_j.value(vj));
  const Velocity w = phi_i.grad(vi) / mi - phi_j.grad(vj) / mj;
  const Velocity gt = alpha_i * tj * f_i.grad(vi) / mi - alpha_j * ti * f_j.grad(vj) / mj;
  const double d = 2.0;
  const double div = (1.0 - d) * (1.0 / mi + 1.0 / mj) * g.dot(w) +
                     r * r * (P.cwiseProduct(phi_i.hess(vi) / (mi * mi) + phi_j.hess(vj) / (mj * mj))).sum();
  const double rhs = mu * mu * (2.0 * r * r * gt.dot(P * w) + ti * tj * div);

  LemmaTable table;
  std::vector<double> th, res;
  for (double theta : thetas) {
    require(theta > 0, "grazing_lemma_check: angles must be positive");
    double s = 0.0;
    for (double sign : {1.0, -1.0}) {
      const Velocity omega = k * std::cos(theta) + sign * gamma * std::sin(theta);
      const auto [a, b] = post_collision(vi, vj, omega, mi, mj);
      const double bar = phi_i.value(a) + phi_j.value(b) - phi_i.value(vi) - phi_j.value(vj);
      s += tau(alpha_i, f_i.value(a)) * tau(alpha_j, f_j.value(b)) * bar;
    }
    LemmaRow row{theta, s / (theta * theta), rhs, 0.0};
    row.residual = std::abs(row.lhs - row.rhs);
    table.rows.push_back(row);
    th.push_back(theta);
    res.push_back(row.residual);
  }
  if (th.size() >= 2) table.order = fitted_order(th, res);
  return table;
}

PerpTable perp_identity_check(const std::vector<double>& thetas, const Velocity& k_in) {
  require(k_in.size() == 2 && k_in.norm() > 0, "perp_identity_check: need a nonzero planar k");
  const Velocity k = k_in.normalized();
  Velocity gamma(2);
  gamma << -k(1), k(0);
  PerpTable table;
  std::vector<double> th, res;
  for (double theta : thetas) {
    require(theta > 0, "perp_identity_check: angles must be positive");
    Tensor S = Tensor::Zero(2, 2);
    for (double sign : {1.0, -1.0}) {
      const Velocity e = k * (std::cos(theta) - 1.0) + sign * gamma * std::sin(theta);
      S += e * e.transpose();
    }
    PerpRow row;
    row.theta = theta;
    const double t2 = theta * theta;
    row.coefficient = gamma.dot(S * gamma) / t2;
    row.along = k.dot(S * k) / t2;
    row.off_diagonal = k.dot(S * gamma) / t2;
    row.residual = std::abs(row.coefficient - 2.0);
    table.rows.push_back(row);
    th.push_back(theta);
    res.push_back(row.residual);
  }
  if (th.size() >= 2) table.order = fitted_order(th, res);
  return table;
}

void write_grazing_csv(std::ostream& os, const GrazingTable& t) {
  const auto old = os.precision(17);
  os << "eps,K,support_nodes,boltzmann,landau,gap,relative_gap\n";
  for (const auto& r : t.rows)
    os << r.eps << ',' << r.K << ',' << r.support_nodes << ',' << r.boltzmann << ',' << r.landau << ','
       << r.gap << ',' << r.relative << '\n';
  os.precision(old);
}

void write_lemma_csv(std::ostream& os, const LemmaTable& t) {
  const auto old = os.precision(17);
  os << "theta,lhs,rhs,residual\n";
  for (const auto& r : t.rows) os << r.theta << ',' << r.lhs << ',' << r.rhs << ',' << r.residual << '\n';
  os.precision(old);
}

void write_perp_csv(std::ostream& os, const PerpTable& t) {
  const auto old = os.precision(17);
  os << "theta,coefficient,along,off_diagonal,residual\n";
  for (const auto& r : t.rows)
    os << r.theta << ',' << r.coefficient << ',' << r.along << ',' << r.off_diagonal << ','
       << r.residual << '\n';
  os.precision(old);
}

}  // namespace kgen
