#pragma once

#include "kgen/species_kernel.hpp"
#include "kgen/velocity_grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace kgen {

// I(f) = 4 h^d sum |grad sqrt f|^2, cells below the density floor taken as zero.
double fisher_I(const Field& f);
double fisher_total(const Mixture& F);

// Values on the circle nodes 2 pi (k + 1/2) / K (d = 2), or on the
// Gauss-Legendre x uniform-azimuth grid of sphere_quadrature(3, K) (d = 3).
struct SphereFunction {
  int dim = 2;
  int K = 0;
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
};

// Discrete sphere calculus for one resolution; matrices are built once.
class SphereCalculus {
 public:
  SphereCalculus(int dim, int K);

  int dim() const { return dim_; }
  int K() const { return K_; }
  const SphereQuadrature& quadrature() const { return quad_; }

  SphereFunction make(const std::function<double(const Velocity&)>& f) const;
  SphereFunction constant(double c) const;

  // (B f)(w) = int (f(w') - f(w)) b(angle(w, w')) dw'
  SphereFunction apply_B(const SphereFunction& f, const ScalarFunction& b) const;
  // grad f . grad g, spectral on the circle; on S^2 via the defining combination
  SphereFunction gamma_delta(const SphereFunction& f, const SphereFunction& g) const;
  // (Delta(fg) - g Delta f - f Delta g) / 2
  SphereFunction gamma_delta_combination(const SphereFunction& f, const SphereFunction& g) const;
  SphereFunction laplace_beltrami(const SphereFunction& f) const;
  SphereFunction gamma2(const SphereFunction& f, const SphereFunction& g, const ScalarFunction& b) const;
  double integral(const SphereFunction& f) const;

  // int Gamma2(log f, log f) f
  double lsi_lhs(const SphereFunction& f, const ScalarFunction& b) const;
  // int int |f - f'|^2 / (f + f') b
  double lsi_rhs(const SphereFunction& f, const ScalarFunction& b) const;

 private:
  void check(const SphereFunction& f) const;
  Eigen::MatrixXd kernel_matrix(const ScalarFunction& b) const;

  int dim_;
  int K_;
  SphereQuadrature quad_;
  Eigen::MatrixXd D1_;               // d/dtheta on the circle
  Eigen::VectorXd lat_weights_;      // Gauss-Legendre weights in mu
  std::vector<Eigen::MatrixXd> plm_;  // per m: normalised P_l^m(mu_a), l = m..K-1
};

SphereFunction sphere_B(const SphereFunction& f, const ScalarFunction& b);
SphereFunction gamma_delta(const SphereFunction& f, const SphereFunction& g);
SphereFunction gamma2(const SphereFunction& f, const SphereFunction& g, const ScalarFunction& b);
// LHS - Lambda * RHS
double lsi_gap(const SphereFunction& f, const ScalarFunction& b, double Lambda);

// exp(sum_k a_k cos 2k theta) on the circle: even densities
SphereFunction even_trig_density(const SphereCalculus& sc, const std::vector<double>& a);

struct LambdaEstimate {
  double lambda = 0;            // minimised LHS / RHS
  std::vector<double> worst;    // coefficients of the minimiser
  int samples = 0;
  int rejected = 0;             // RHS below floor
};

// Sampled minimisation over even densities plus coordinate descent from the
// worst sample. An upper bound for the optimal constant; use lambda / 2.
LambdaEstimate estimate_lambda_b(const ScalarFunction& b, int dim, int n_samples,
                                 std::uint64_t seed = 11, int K = 128, int modes = 3);

struct FisherHypothesis {
  bool holds = true;
  std::vector<double> lambda_safe;   // per unordered pair
  std::vector<AssumptionReport> pairs;
};

// Assumption check for every pair against half the estimated constant.
FisherHypothesis fisher_hypothesis(const KernelSet& kernels, int dim, int n_samples,
                                   std::uint64_t seed, const std::vector<double>& r_samples);

struct FisherReport {
  std::vector<double> t;
  std::vector<double> I;
  std::vector<double> dI;
  std::vector<int> violation;
  int violations = 0;
  double max_violation = 0;     // largest increase above tol_mono (0 if none)
  double tol_mono = 0;
  bool hypothesis_holds = true;
  std::string note;
};

// I is the recorded Fisher series; h the velocity spacing.
FisherReport monotonicity_audit(const std::vector<double>& t, const std::vector<double>& I, double h,
                                bool hypothesis_holds);
FisherReport monotonicity_audit(const std::vector<double>& t, const std::vector<Mixture>& snapshots,
                                const FisherHypothesis& hyp);

// t,I,dI,violation
void write_fisher_csv(std::ostream& os, const FisherReport& r);

}  // namespace kgen
