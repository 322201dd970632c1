#pragma once

#include "kgen/common.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kgen {

enum class Statistics : int { fermi = -1, maxwell = 0, bose = 1 };

Statistics statistics_from_alpha(int alpha);
std::string to_string(Statistics s);

class SpeciesSet {
 public:
  SpeciesSet(std::vector<double> masses, std::vector<Statistics> statistics);

  int size() const { return static_cast<int>(masses_.size()); }
  double mass(int i) const { return masses_.at(i); }
  Statistics statistics(int i) const { return stats_.at(i); }
  int alpha(int i) const { return static_cast<int>(stats_.at(i)); }
  const std::vector<double>& masses() const { return masses_; }

 private:
  std::vector<double> masses_;
  std::vector<Statistics> stats_;
};

using ScalarFunction = std::function<double(double)>;

enum class RadialKind { maxwell, power_law, tabulated, exponential, custom };

struct RadialFactor {
  RadialKind kind = RadialKind::custom;
  ScalarFunction value;
  ScalarFunction derivative;  // empty -> central differences
  std::string description;
};

struct AngularFactor {
  ScalarFunction value;
  std::string description;
};

RadialFactor maxwell_radial(double c);
RadialFactor power_law_radial(double c, double gamma);
RadialFactor exponential_radial(double c, double rate);
// Piecewise linear through (r, alpha) rows, constant beyond the ends.
RadialFactor tabulated_radial(std::vector<std::pair<double, double>> table);
RadialFactor tabulated_radial_from_file(const std::string& path);

AngularFactor constant_angular(double c);
AngularFactor cosine_angular(double c);
AngularFactor zero_angular();

class PairKernel {
 public:
  PairKernel(RadialFactor radial, AngularFactor angular);

  RadialKind kind() const { return radial_.kind; }
  double radial(double r) const;
  double radial_derivative(double r) const;
  bool has_analytic_derivative() const { return static_cast<bool>(radial_.derivative); }
  // Zero outside [0, pi/2].
  double angular(double theta) const;
  const RadialFactor& radial_factor() const { return radial_; }
  const AngularFactor& angular_factor() const { return angular_; }
  std::string describe() const;

 private:
  RadialFactor radial_;
  AngularFactor angular_;
};

// Stored per unordered pair, so (i,j) and (j,i) share one object.
class KernelSet {
 public:
  KernelSet(int species_count, const PairKernel& all_pairs);
  explicit KernelSet(int species_count);

  void set(int i, int j, PairKernel kernel);
  const PairKernel& operator()(int i, int j) const;
  int species_count() const { return n_; }

 private:
  int slot(int i, int j) const;
  int n_;
  std::vector<std::optional<PairKernel>> pairs_;
};

template <typename DerivedA, typename DerivedB, typename DerivedW>
std::pair<Velocity, Velocity> post_collision(const Eigen::MatrixBase<DerivedA>& vi,
                                             const Eigen::MatrixBase<DerivedB>& vj,
                                             const Eigen::MatrixBase<DerivedW>& omega, double mi,
                                             double mj) {
  require(std::abs(omega.norm() - 1.0) <= 1e-12, "post_collision: omega must be a unit vector");
  require(mi > 0 && mj > 0, "post_collision: masses must be positive");
  const Velocity g = vi - vj;
  const double r = g.norm();
  if (r == 0.0) return {Velocity(vi), Velocity(vj)};
  const double total = mi + mj;
  const Velocity centre = (mi * vi + mj * vj) / total;
  Velocity a = centre + (mj / total) * r * omega;
  Velocity b = centre - (mi / total) * r * omega;
  return {a, b};
}

template <typename DerivedA, typename DerivedB, typename DerivedW>
double deviation_angle(const Eigen::MatrixBase<DerivedA>& vi, const Eigen::MatrixBase<DerivedB>& vj,
                       const Eigen::MatrixBase<DerivedW>& omega) {
  const Velocity g = vi - vj;
  const double r = g.norm();
  if (r == 0.0) throw PreconditionError("undefined deviation angle");
  const double c = std::clamp(g.dot(omega) / r, -1.0, 1.0);
  return std::acos(c);
}

double kernel_B(const PairKernel& pair, double r, double theta);
double kernel_A(const PairKernel& pair, double r, double mi);

// |S^k| with the convention |S^0| = 2.
double sphere_area(int k);

class GrazingFamily {
 public:
  // base: unnormalised beta on [0, pi/2]; rescaled per pair at construction.
  GrazingFamily(ScalarFunction base, int dim, const SpeciesSet& species);

  int dim() const { return dim_; }
  double target_moment(int i, int j) const;
  double beta(int i, int j, double theta) const;
  double scaled_beta(int i, int j, double eps, double theta) const;
  // b^eps = beta^eps / sin^{d-2}
  double scaled_b(int i, int j, double eps, double theta) const;
  double second_moment(int i, int j, double eps = 1.0) const;
  KernelSet scaled_kernels(double eps, const RadialFactor& radial) const;

 private:
  ScalarFunction base_;
  int dim_;
  SpeciesSet species_;
  std::vector<double> scale_;  // per unordered pair
  double base_moment_;
};

double scaled_angular(const GrazingFamily& fam, int i, int j, double eps, double theta);

struct AssumptionReport {
  bool holds = true;
  double worst_ratio = 0.0;
  int indeterminate = 0;
  double threshold = 0.0;
};

AssumptionReport assumption_check(const PairKernel& pair, double lambda_b,
                                  const std::vector<double>& r_samples);

}  // namespace kgen
