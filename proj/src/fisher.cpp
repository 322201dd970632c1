#include "kgen/fisher.hpp"

#include "kgen/boltzmann.hpp"
#include "kgen/parallel.hpp"
#include "kgen/quadrature.hpp"

#include <cmath>
#include <ostream>
#include <random>

namespace kgen {

double fisher_I(const Field& f) {
  const VelocityGrid& g = f.grid;
  if (f.values.size() == 0) return 0.0;
  const double fmax = f.values.maxCoeff();
  if (fmax <= 0) return 0.0;
  // 4|grad sqrt f|^2: same integral as |grad f|^2/f, but a tail cell sitting next to a
  // clipped neighbour no longer divides an O(f_neighbour/h) gradient by a near-floor value
  const double floor = density_floor * fmax;
  const Eigen::VectorXd r = f.values.unaryExpr([floor](double x) { return x > floor ? std::sqrt(x) : 0.0; });
  const Eigen::MatrixXd G = grad_v(g, r);
  return 4.0 * g.cell_volume() * G.squaredNorm();
}

double fisher_total(const Mixture& F) {
  double s = 0.0;
  for (int i = 0; i < F.species_count(); ++i) s += fisher_I(F.field(i));
  return s;
}

SphereCalculus::SphereCalculus(int dim, int K) : dim_(dim), K_(K), quad_(sphere_quadrature(dim, K)) {
  if (dim == 2) {
    D1_ = fourier_derivative_matrix(K, 2.0 * pi);
    return;
  }
  // orthonormal associated Legendre functions on the latitude nodes
  const GaussRule gl = gauss_legendre(K);
  lat_weights_ = gl.weights;
  plm_.resize(K);
  for (int m = 0; m < K; ++m) {
    Eigen::MatrixXd P(K, K - m);
    for (int a = 0; a < K; ++a) {
      const double mu = gl.nodes(a), s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
      double pmm = std::sqrt(0.5);
      for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
      P(a, 0) = pmm;
      if (K - m > 1) P(a, 1) = std::sqrt(2.0 * m + 3.0) * mu * pmm;
      for (int l = m + 2; l < K; ++l) {
        const double A = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
        const double B = std::sqrt((static_cast<double>(l - 1) * (l - 1) - m * m) /
                                   (4.0 * (l - 1) * (l - 1) - 1.0));
        P(a, l - m) = A * (mu * P(a, l - m - 1) - B * P(a, l - m - 2));
      }
    }
    plm_[m] = P;
  }
}

void SphereCalculus::check(const SphereFunction& f) const {
  require(f.dim == dim_ && f.K == K_ && f.values.size() == quad_.size(),
          "sphere function does not match the sphere grid");
}

SphereFunction SphereCalculus::make(const std::function<double(const Velocity&)>& f) const {
  SphereFunction out{dim_, K_, Eigen::VectorXd(quad_.size())};
  for (Eigen::Index q = 0; q < quad_.size(); ++q) out.values(q) = f(quad_.nodes.col(q));
  return out;
}

SphereFunction SphereCalculus::constant(double c) const {
  return {dim_, K_, Eigen::VectorXd::Constant(quad_.size(), c)};
}

Eigen::MatrixXd SphereCalculus::kernel_matrix(const ScalarFunction& b) const {
  const Eigen::Index Q = quad_.size();
  Eigen::MatrixXd W(Q, Q);
  for (Eigen::Index k = 0; k < Q; ++k)
    for (Eigen::Index l = 0; l < Q; ++l) {
      const double c = std::clamp(quad_.nodes.col(k).dot(quad_.nodes.col(l)), -1.0, 1.0);
      W(k, l) = quad_.weights(l) * b(std::acos(c));
    }
  return W;
}

SphereFunction SphereCalculus::apply_B(const SphereFunction& f, const ScalarFunction& b) const {
  check(f);
  const Eigen::MatrixXd W = kernel_matrix(b);
  const Eigen::VectorXd row = W.rowwise().sum();
  return {dim_, K_, W * f.values - row.cwiseProduct(f.values)};
}

SphereFunction SphereCalculus::gamma_delta(const SphereFunction& f, const SphereFunction& g) const {
  check(f);
  check(g);
  if (dim_ == 2) return {dim_, K_, (D1_ * f.values).cwiseProduct(D1_ * g.values)};
  return gamma_delta_combination(f, g);
}

SphereFunction SphereCalculus::laplace_beltrami(const SphereFunction& f) const {
  check(f);
  if (dim_ == 2) return {dim_, K_, D1_ * (D1_ * f.values)};
  // real Fourier in the azimuth, Legendre analysis per order, -l(l+1), synthesis
  const int M = 2 * K_;
  Eigen::Map<const Eigen::MatrixXd> F(f.values.data(), M, K_);
  Eigen::MatrixXd C(M, M);  // C(m, l) = cos(m phi_l), rows 0..K-1; sines below
  for (int m = 0; m < K_; ++m)
    for (int l = 0; l < M; ++l) {
      const double phi = 2.0 * pi * (l + 0.5) / M;
      C(m, l) = std::cos(m * phi);
      C(K_ + m, l) = std::sin(m * phi);
    }
  const Eigen::MatrixXd coef = (2.0 / M) * (C * F);  // 2K x K_lat
  Eigen::MatrixXd out_coef = Eigen::MatrixXd::Zero(M, K_);
  for (int m = 0; m < K_; ++m) {
    const Eigen::MatrixXd& P = plm_[m];
    Eigen::VectorXd eig(P.cols());
    for (Eigen::Index k = 0; k < P.cols(); ++k) {
      const double l = m + static_cast<double>(k);
      eig(k) = -l * (l + 1.0);
    }
    for (int part : {m, K_ + m}) {
      const Eigen::VectorXd c = coef.row(part).transpose();
      const Eigen::VectorXd a = P.transpose() * lat_weights_.cwiseProduct(c);
      out_coef.row(part) = (P * eig.cwiseProduct(a)).transpose();
    }
  }
  out_coef.row(0) *= 0.5;
  SphereFunction out{dim_, K_, Eigen::VectorXd(quad_.size())};
  Eigen::Map<Eigen::MatrixXd>(out.values.data(), M, K_) = C.transpose() * out_coef;
  return out;
}

SphereFunction SphereCalculus::gamma_delta_combination(const SphereFunction& f,
                                                       const SphereFunction& g) const {
  const SphereFunction fg{dim_, K_, f.values.cwiseProduct(g.values)};
  const Eigen::VectorXd r = laplace_beltrami(fg).values -
                            laplace_beltrami(f).values.cwiseProduct(g.values) -
                            f.values.cwiseProduct(laplace_beltrami(g).values);
  return {dim_, K_, 0.5 * r};
}

SphereFunction SphereCalculus::gamma2(const SphereFunction& f, const SphereFunction& g,
                                      const ScalarFunction& b) const {
  const Eigen::VectorXd r = apply_B(gamma_delta(f, g), b).values -
                            gamma_delta(apply_B(f, b), g).values -
                            gamma_delta(f, apply_B(g, b)).values;
  return {dim_, K_, 0.5 * r};
}

double SphereCalculus::integral(const SphereFunction& f) const {
  check(f);
  return quad_.weights.dot(f.values);
}

double SphereCalculus::lsi_lhs(const SphereFunction& f, const ScalarFunction& b) const {
  check(f);
  require(f.values.minCoeff() > 0, "lsi_gap: density must be positive");
  const SphereFunction g{dim_, K_, f.values.array().log().matrix()};
  return integral({dim_, K_, gamma2(g, g, b).values.cwiseProduct(f.values)});
}

double SphereCalculus::lsi_rhs(const SphereFunction& f, const ScalarFunction& b) const {
  check(f);
  require(f.values.minCoeff() > 0, "lsi_gap: density must be positive");
  const Eigen::MatrixXd W = kernel_matrix(b);
  double s = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    double row = 0.0;
    for (Eigen::Index l = 0; l < f.size(); ++l) {
      const double d = f.values(k) - f.values(l);
      row += W(k, l) * d * d / (f.values(k) + f.values(l));
    }
    s += quad_.weights(k) * row;
  }
  return s;
}

SphereFunction sphere_B(const SphereFunction& f, const ScalarFunction& b) {
  return SphereCalculus(f.dim, f.K).apply_B(f, b);
}

SphereFunction gamma_delta(const SphereFunction& f, const SphereFunction& g) {
  return SphereCalculus(f.dim, f.K).gamma_delta(f, g);
}

SphereFunction gamma2(const SphereFunction& f, const SphereFunction& g, const ScalarFunction& b) {
  return SphereCalculus(f.dim, f.K).gamma2(f, g, b);
}

double lsi_gap(const SphereFunction& f, const ScalarFunction& b, double Lambda) {
  const SphereCalculus sc(f.dim, f.K);
  return sc.lsi_lhs(f, b) - Lambda * sc.lsi_rhs(f, b);
}

SphereFunction even_trig_density(const SphereCalculus& sc, const std::vector<double>& a) {
  require(sc.dim() == 2, "even_trig_density: circle only");
  return sc.make([&](const Velocity& w) {
    const double th = std::atan2(w(1), w(0));
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * std::cos(2.0 * (k + 1) * th);
    return std::exp(s);
  });
}

namespace {

constexpr double rhs_floor = 1e-10;
constexpr double coeff_bound = 3.0;

struct RatioEval {
  const SphereCalculus& sc;
  const ScalarFunction& b;
  // +inf when the right side is degenerate
  double operator()(const std::vector<double>& a) const {
    const SphereFunction f = even_trig_density(sc, a);
    const double rhs = sc.lsi_rhs(f, b);
    if (!(rhs > rhs_floor)) return HUGE_VAL;
    return sc.lsi_lhs(f, b) / rhs;
  }
};

}  // namespace

LambdaEstimate estimate_lambda_b(const ScalarFunction& b, int dim, int n_samples,
                                 std::uint64_t seed, int K, int modes) {
  require(n_samples >= 100, "estimate_lambda_b: at least 100 samples");
  require(dim == 2, "estimate_lambda_b: the sampled family lives on the circle (d = 2)");
  require(modes >= 1, "estimate_lambda_b: need at least one mode");
  const SphereCalculus sc(dim, K);
  const RatioEval ratio{sc, b};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> amp(0.05, 2.0);
  std::vector<std::vector<double>> coeffs(n_samples, std::vector<double>(modes));
  for (auto& c : coeffs) {
    const double A = amp(rng);
    for (double& x : c) x = A * U(rng);
  }
  std::vector<double> values(n_samples);
  parallel_chunks(n_samples, [&](int s) { values[s] = ratio(coeffs[s]); });

  LambdaEstimate est;
  est.samples = n_samples;
  int best = -1;
  for (int s = 0; s < n_samples; ++s) {
    if (values[s] == HUGE_VAL) {
      ++est.rejected;
      continue;
    }
    if (best < 0 || values[s] < values[best]) best = s;
  }
  if (best < 0) throw NumericalError("degenerate sample family");

  std::vector<double> a = coeffs[best];
  double val = values[best];
  for (double step = 0.1; step > 1e-4; step *= 0.5) {
    bool moved = true;
    for (int sweep = 0; moved && sweep < 50; ++sweep) {
      moved = false;
      for (int k = 0; k < modes; ++k)
        for (double dir : {1.0, -1.0}) {
          std::vector<double> trial = a;
          trial[k] = std::clamp(trial[k] + dir * step, -coeff_bound, coeff_bound);
          const double v = ratio(trial);
          if (v < val) {
            val = v;
            a = trial;
            moved = true;
          }
        }
    }
  }
  est.lambda = val;
  est.worst = a;
  return est;
}

FisherHypothesis fisher_hypothesis(const KernelSet& kernels, int dim, int n_samples,
                                   std::uint64_t seed, const std::vector<double>& r_samples) {
  (void)dim;  // the sphere inequality is sampled on the circle in every dimension
  FisherHypothesis h;
  const int N = kernels.species_count();
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      const PairKernel& k = kernels(i, j);
      const ScalarFunction b = [&k](double t) { return k.angular(t); };
      const double lam = 0.5 * estimate_lambda_b(b, 2, n_samples, seed).lambda;
      h.lambda_safe.push_back(lam);
      h.pairs.push_back(assumption_check(k, lam, r_samples));
      h.holds = h.holds && h.pairs.back().holds;
    }
  return h;
}

FisherReport monotonicity_audit(const std::vector<double>& t, const std::vector<double>& I, double h,
                                bool hypothesis_holds) {
  require(t.size() == I.size() && !t.empty(), "monotonicity_audit: series length mismatch");
  FisherReport r;
  r.t = t;
  r.I = I;
  r.hypothesis_holds = hypothesis_holds;
  r.tol_mono = 1e-6 * I[0] + 5.0 * h * h * I[0];
  r.dI.assign(I.size(), 0.0);
  r.violation.assign(I.size(), 0);
  for (std::size_t k = 1; k < I.size(); ++k) {
    r.dI[k] = I[k] - I[k - 1];
    if (r.dI[k] > r.tol_mono) {
      r.violation[k] = 1;
      ++r.violations;
      r.max_violation = std::max(r.max_violation, r.dI[k] - r.tol_mono);
    }
  }
  r.note = hypothesis_holds ? "hypothesis satisfied"
                            : "hypothesis not satisfied; monotonicity not expected";
  return r;
}

FisherReport monotonicity_audit(const std::vector<double>& t, const std::vector<Mixture>& snapshots,
                                const FisherHypothesis& hyp) {
  require(!snapshots.empty(), "monotonicity_audit: empty trajectory");
  std::vector<double> I;
  for (const Mixture& F : snapshots) I.push_back(fisher_total(F));
  return monotonicity_audit(t, I, snapshots.front().grid.spacing(), hyp.holds);
}

void write_fisher_csv(std::ostream& os, const FisherReport& r) {
  const auto old = os.precision(17);
  os << "t,I,dI,violation\n";
  for (std::size_t k = 0; k < r.t.size(); ++k)
    os << r.t[k] << ',' << r.I[k] << ',' << r.dI[k] << ',' << r.violation[k] << '\n';
  os.precision(old);
}

}  // namespace kgen
