#pragma once

#include <Eigen/Dense>

#include <functional>

namespace kgen {

struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Golub-Welsch on [-1, 1].
GaussRule gauss_legendre(int points);

// Composite Gauss-Legendre on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64,
                 int points = 12);

// Spectral differentiation on a periodic grid x_k = 2*pi*k/n (n even).
Eigen::MatrixXd fourier_derivative_matrix(int n, double period);

// Differentiation of the interpolating polynomial through arbitrary nodes.
Eigen::MatrixXd polynomial_derivative_matrix(const Eigen::VectorXd& nodes);

}  // namespace kgen
