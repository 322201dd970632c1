#include "kgen/quadrature.hpp"

#include "kgen/common.hpp"

#include <cmath>

namespace kgen {

GaussRule gauss_legendre(int points) {
  require(points >= 1, "gauss_legendre: need at least one point");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  GaussRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
  // one Newton polish per node keeps nodes accurate to roundoff
  for (int k = 0; k < points && points > 1; ++k) {
    double x = rule.nodes(k);
    for (int it = 0; it < 2; ++it) {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= points; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      const double dp = points * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
      rule.nodes(k) = x;
      rule.weights(k) = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels, int points) {
  static thread_local int cached_points = 0;
  static thread_local GaussRule rule;
  if (cached_points != points) {
    rule = gauss_legendre(points);
    cached_points = points;
  }
  const double width = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    double panel = 0.0;
    for (int k = 0; k < points; ++k) panel += rule.weights(k) * f(mid + 0.5 * width * rule.nodes(k));
    sum += 0.5 * width * panel;
  }
  return sum;
}

Eigen::MatrixXd fourier_derivative_matrix(int n, double period) {
  require(n >= 2 && n % 2 == 0, "fourier_derivative_matrix: n must be even");
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  const double scale = 2.0 * pi / period;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const int diff = j - k;
      const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      D(j, k) = scale * 0.5 * sign / std::tan(pi * diff / n);
    }
  return D;
}

Eigen::MatrixXd polynomial_derivative_matrix(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd c(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double p = 1.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != j) p *= x(j) - x(k);
    c(j) = p;
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != j) D(j, k) = c(j) / (c(k) * (x(j) - x(k)));
    D(j, j) = -D.row(j).sum();
  }
  return D;
}

}  // namespace kgen
