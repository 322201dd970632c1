#include "kgen/boltzmann.hpp"

#include "collision_sweep.hpp"

#include <cmath>

namespace kgen {

using detail::BlockData;
using detail::DepositMode;
using detail::SweepOptions;
using detail::SweepSource;
using detail::SweepTask;

double tau(const SpeciesSet& species, int i, double f) {
  require(f >= 0, "tau: density must be nonnegative");
  const int a = species.alpha(i);
  if (a == -1 && f > 1.0) throw PreconditionError("tau: Fermi density exceeds 1");
  return 1.0 + a * f;
}

double log_mean(double s, double t) {
  if (!(s > 0) || !(t > 0)) throw PreconditionError("log_mean: arguments must be positive");
  if (s < t) std::swap(s, t);  // exact symmetry
  const double z = std::log(s / t);
  if (std::abs(z) >= log_mean_threshold) return (s - t) / z;
  const double m = 0.5 * (s + t);
  const double x = (s - t) / (s + t);
  const double x2 = x * x;
  return m * (1.0 - x2 / 3.0 - 4.0 * x2 * x2 / 45.0);
}

double grad_bar(const TestFunction& phi_i, const TestFunction& phi_j, const Velocity& vi,
                const Velocity& vj, const Velocity& omega, double mi, double mj) {
  const auto [a, b] = post_collision(vi, vj, omega, mi, mj);
  return phi_j(b) + phi_i(a) - phi_j(vj) - phi_i(vi);
}

namespace {

// Maxwell statistics skip the occupancy factors entirely.
inline double gain_loss(double fa, double fb, double fap, double fbp, int ai, int aj) {
  if (ai == 0 && aj == 0) return fap * fbp - fa * fb;
  return fap * fbp * (1.0 + ai * fa) * (1.0 + aj * fb) - fa * fb * (1.0 + ai * fap) * (1.0 + aj * fbp);
}

class CollisionTask : public SweepTask {
 public:
  CollisionTask(const SpeciesSet& s, double scale) : species_(s), scale_(scale) {}
  double block(const BlockData& d, double* x) const override {
    const int ai = species_.alpha(d.i), aj = species_.alpha(d.j);
    const double c = scale_ * d.measure;
    const double *fa = d.a[0], *fb = d.b[0], *fap = d.ap[0], *fbp = d.bp[0];
    if (ai == 0 && aj == 0) {
      for (int e = 0; e < d.count; ++e) x[e] = c * (fap[e] * fbp[e] - fa[e] * fb[e]);
    } else {
      for (int e = 0; e < d.count; ++e) x[e] = c * gain_loss(fa[e], fb[e], fap[e], fbp[e], ai, aj);
    }
    return 0.0;
  }

 private:
  const SpeciesSet& species_;
  double scale_;
};

class WeakTask : public SweepTask {
 public:
  explicit WeakTask(const SpeciesSet& s) : species_(s) {}
  double block(const BlockData& d, double*) const override {
    const int ai = species_.alpha(d.i), aj = species_.alpha(d.j);
    const double *fa = d.a[0], *fb = d.b[0], *fap = d.ap[0], *fbp = d.bp[0];
    const double *pa = d.a[1], *pb = d.b[1], *pap = d.ap[1], *pbp = d.bp[1];
    double sum = 0.0;
    for (int e = 0; e < d.count; ++e)
      sum += (pap[e] + pbp[e] - pa[e] - pb[e]) * gain_loss(fa[e], fb[e], fap[e], fbp[e], ai, aj);
    return -0.5 * d.measure * sum;
  }

 private:
  const SpeciesSet& species_;
};

class DissipationTask : public SweepTask {
 public:
  DissipationTask(const SpeciesSet& s, std::vector<double> floors)
      : species_(s), floors_(std::move(floors)) {}
  double block(const BlockData& d, double*) const override {
    const int ai = species_.alpha(d.i), aj = species_.alpha(d.j);
    const double li = floors_[d.i], lj = floors_[d.j];
    const double *fa = d.a[0], *fb = d.b[0], *fap = d.ap[0], *fbp = d.bp[0];
    double sum = 0.0;
    for (int e = 0; e < d.count; ++e) {
      if (fa[e] <= li || fap[e] <= li || fb[e] <= lj || fbp[e] <= lj) continue;
      const double ta = 1.0 + ai * fa[e], tb = 1.0 + aj * fb[e];
      const double tap = 1.0 + ai * fap[e], tbp = 1.0 + aj * fbp[e];
      const double A = fap[e] * fbp[e] * ta * tb;
      const double B = fa[e] * fb[e] * tap * tbp;
      if (!(A > 0) || !(B > 0)) continue;
      sum += (A - B) * std::log(A / B);
    }
    return 0.5 * d.measure * sum;
  }

 private:
  const SpeciesSet& species_;
  std::vector<double> floors_;
};

class MobilityTask : public SweepTask {
 public:
  MobilityTask(const SpeciesSet& s, std::vector<double> floors, double hd)
      : species_(s), floors_(std::move(floors)), hd_(hd) {}
  double block(const BlockData& d, double* x) const override {
    const int ai = species_.alpha(d.i), aj = species_.alpha(d.j);
    const double li = floors_[d.i], lj = floors_[d.j];
    const double *fa = d.a[0], *fb = d.b[0], *fap = d.ap[0], *fbp = d.bp[0];
    const double *xa = d.a[1], *xb = d.b[1], *xap = d.ap[1], *xbp = d.bp[1];
    const double c = -0.5 * d.measure / hd_;
    for (int e = 0; e < d.count; ++e) {
      x[e] = 0.0;
      if (fa[e] <= li || fap[e] <= li || fb[e] <= lj || fbp[e] <= lj) continue;
      const double A = fap[e] * fbp[e] * (1.0 + ai * fa[e]) * (1.0 + aj * fb[e]);
      const double B = fa[e] * fb[e] * (1.0 + ai * fap[e]) * (1.0 + aj * fbp[e]);
      if (!(A > 0) || !(B > 0)) continue;
      x[e] = c * log_mean(A, B) * (xap[e] + xbp[e] - xa[e] - xb[e]);
    }
    return 0.0;
  }

 private:
  const SpeciesSet& species_;
  std::vector<double> floors_;
  double hd_;
};

class LinearMobilityTask : public SweepTask {
 public:
  explicit LinearMobilityTask(double hd) : hd_(hd) {}
  double block(const BlockData& d, double* x) const override {
    const double *xa = d.a[0], *xb = d.b[0], *xap = d.ap[0], *xbp = d.bp[0];
    const double c = -0.5 * d.measure / hd_;
    for (int e = 0; e < d.count; ++e) x[e] = c * (xap[e] + xbp[e] - xa[e] - xb[e]);
    return 0.0;
  }

 private:
  double hd_;
};

// scale * sum measure * grad_bar(source 0) * grad_bar(source 1)
class LinearPairingTask : public SweepTask {
 public:
  explicit LinearPairingTask(double scale) : scale_(scale) {}
  double block(const BlockData& d, double*) const override {
    const int s1 = static_cast<int>(d.a.size()) - 1;
    double sum = 0.0;
    for (int e = 0; e < d.count; ++e) {
      const double g0 = d.ap[0][e] + d.bp[0][e] - d.a[0][e] - d.b[0][e];
      const double g1 = d.ap[s1][e] + d.bp[s1][e] - d.a[s1][e] - d.b[s1][e];
      sum += g0 * g1;
    }
    return scale_ * d.measure * sum;
  }

 private:
  double scale_;
};

std::vector<double> floors_of(const Mixture& F) {
  std::vector<double> fl(F.species_count());
  for (int i = 0; i < F.species_count(); ++i) fl[i] = density_floor * F.values.col(i).maxCoeff();
  return fl;
}

}  // namespace

BoltzmannOperator::BoltzmannOperator(const SpeciesSet& species, const KernelSet& kernels,
                                     const VelocityGrid& grid, const SphereQuadrature& squad,
                                     CollisionForm form)
    : species_(species),
      grid_(grid),
      form_(form),
      geo_(std::make_unique<detail::SweepGeometry>(grid, species, kernels, squad)) {}

BoltzmannOperator::~BoltzmannOperator() = default;
BoltzmannOperator::BoltzmannOperator(BoltzmannOperator&&) noexcept = default;

Eigen::VectorXd BoltzmannOperator::q_pair(const Mixture& F, int i, int j) const {
  require(F.grid == grid_, "q_pair: mixture lives on a different grid");
  validate(F, species_);
  const int N = species_.size();
  require(i >= 0 && j >= 0 && i < N && j < N, "q_pair: species index out of range");
  const int a = std::min(i, j), b = std::max(i, j);
  std::vector<SweepSource> src{{&F.values, true}};
  SweepOptions opt;
  opt.mode = form_ == CollisionForm::adjoint ? DepositMode::adjoint : DepositMode::gather;
  opt.only_plan = a * N - a * (a - 1) / 2 + (b - a);
  // the plan stores the pair as (min, max); for i > j the wanted deposit is on
  // the second particle, and column i then receives nothing else
  opt.first_particle_only = i <= j;
  const double scale = form_ == CollisionForm::adjoint ? 0.5 : 1.0;
  CollisionTask task(species_, scale / grid_.cell_volume());
  Eigen::MatrixXd out;
  detail::run_sweep(*geo_, src, opt, task, &out);
  return out.col(i);
}

CollisionResult BoltzmannOperator::q_total(const Mixture& F, bool project) const {
  require(F.grid == grid_, "q_total: mixture lives on a different grid");
  validate(F, species_);
  const int N = species_.size();
  CollisionResult res;
  res.grid = grid_;
  res.q = Eigen::MatrixXd::Zero(grid_.size(), N);
  res.pair_norms = Eigen::MatrixXd::Zero(N, N);
  const double scale = (form_ == CollisionForm::adjoint ? 0.5 : 1.0) / grid_.cell_volume();
  CollisionTask task(species_, scale);
  std::vector<SweepSource> src{{&F.values, true}};
  int plan = 0;
  for (int a = 0; a < N; ++a)
    for (int b = a; b < N; ++b, ++plan) {
      SweepOptions opt;
      opt.mode = form_ == CollisionForm::adjoint ? DepositMode::adjoint : DepositMode::gather;
      opt.only_plan = plan;
      Eigen::MatrixXd out;
      detail::run_sweep(*geo_, src, opt, task, &out);
      const double w = std::sqrt(grid_.cell_volume());
      res.pair_norms(a, b) = w * out.col(a).norm();
      res.pair_norms(b, a) = w * out.col(b).norm();
      res.q += out;
    }
  return project ? conservative_projection(res, species_) : res;
}

double BoltzmannOperator::weak_form(const Mixture& F, const Eigen::MatrixXd& phi) const {
  require(F.grid == grid_, "weak_form: mixture lives on a different grid");
  validate(F, species_);
  require(phi.rows() == grid_.size() && phi.cols() == species_.size(),
          "weak_form: test function has the wrong shape");
  std::vector<SweepSource> src{{&F.values, true}, {&phi, false}};
  WeakTask task(species_);
  return detail::run_sweep(*geo_, src, SweepOptions{}, task, nullptr);
}

double BoltzmannOperator::dissipation(const Mixture& F) const {
  require(F.grid == grid_, "dissipation: mixture lives on a different grid");
  validate(F, species_);
  std::vector<SweepSource> src{{&F.values, true}};
  DissipationTask task(species_, floors_of(F));
  return detail::run_sweep(*geo_, src, SweepOptions{}, task, nullptr);
}

Eigen::MatrixXd BoltzmannOperator::mobility(const Mixture& F, const Eigen::MatrixXd& xi) const {
  require(F.grid == grid_, "mobility: mixture lives on a different grid");
  validate(F, species_);
  require(xi.rows() == grid_.size() && xi.cols() == species_.size(),
          "mobility: argument has the wrong shape");
  std::vector<SweepSource> src{{&F.values, true}, {&xi, false}};
  MobilityTask task(species_, floors_of(F), grid_.cell_volume());
  SweepOptions opt;
  opt.mode = DepositMode::adjoint;
  Eigen::MatrixXd out;
  detail::run_sweep(*geo_, src, opt, task, &out);
  return out;
}

Eigen::MatrixXd BoltzmannOperator::mobility_linear(const Eigen::MatrixXd& xi) const {
  require(xi.rows() == grid_.size() && xi.cols() == species_.size(),
          "mobility_linear: argument has the wrong shape");
  std::vector<SweepSource> src{{&xi, false}};
  LinearMobilityTask task(grid_.cell_volume());
  SweepOptions opt;
  opt.mode = DepositMode::adjoint;
  Eigen::MatrixXd out;
  detail::run_sweep(*geo_, src, opt, task, &out);
  return out;
}

CollisionResult BoltzmannOperator::q_linear(const Mixture& F, bool project) const {
  require(F.grid == grid_, "q_linear: mixture lives on a different grid");
  CollisionResult res;
  res.grid = grid_;
  res.q = -mobility_linear(F.values);
  res.pair_norms = Eigen::MatrixXd::Zero(species_.size(), species_.size());
  return project ? conservative_projection(res, species_) : res;
}

double BoltzmannOperator::dissipation_linear(const Mixture& F) const {
  require(F.grid == grid_, "dissipation_linear: mixture lives on a different grid");
  std::vector<SweepSource> src{{&F.values, false}};
  LinearPairingTask task(0.5);
  return detail::run_sweep(*geo_, src, SweepOptions{}, task, nullptr);
}

double BoltzmannOperator::weak_form_linear(const Mixture& F, const Eigen::MatrixXd& phi) const {
  require(F.grid == grid_, "weak_form_linear: mixture lives on a different grid");
  std::vector<SweepSource> src{{&F.values, false}, {&phi, false}};
  LinearPairingTask task(-0.5);
  return detail::run_sweep(*geo_, src, SweepOptions{}, task, nullptr);
}

Eigen::VectorXd q_pair(const Mixture& F, int i, int j, const SpeciesSet& species,
                       const KernelSet& kernels, const SphereQuadrature& squad) {
  return BoltzmannOperator(species, kernels, F.grid, squad).q_pair(F, i, j);
}

CollisionResult q_total(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels,
                        const SphereQuadrature& squad, bool project) {
  return BoltzmannOperator(species, kernels, F.grid, squad).q_total(F, project);
}

double weak_form(const Mixture& F, const Eigen::MatrixXd& phi, const SpeciesSet& species,
                 const KernelSet& kernels, const SphereQuadrature& squad) {
  return BoltzmannOperator(species, kernels, F.grid, squad).weak_form(F, phi);
}

double entropy_dissipation_B(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels,
                             const SphereQuadrature& squad) {
  return BoltzmannOperator(species, kernels, F.grid, squad).dissipation(F);
}

CollisionResult q_linear_B(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels,
                           const SphereQuadrature& squad) {
  return BoltzmannOperator(species, kernels, F.grid, squad).q_linear(F);
}

std::vector<Eigen::MatrixXd> collision_invariants(const VelocityGrid& grid,
                                                  const SpeciesSet& species) {
  const int N = species.size();
  const int d = grid.dim();
  const Eigen::MatrixXd v = grid.nodes();
  std::vector<Eigen::MatrixXd> out;
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(grid.size(), N);
    c.col(i).setOnes();
    out.push_back(c);
  }
  for (int a = 0; a < d; ++a) {
    Eigen::MatrixXd c(grid.size(), N);
    for (int i = 0; i < N; ++i) c.col(i) = species.mass(i) * v.col(a);
    out.push_back(c);
  }
  Eigen::MatrixXd e(grid.size(), N);
  for (int i = 0; i < N; ++i) e.col(i) = 0.5 * species.mass(i) * v.rowwise().squaredNorm();
  out.push_back(e);
  return out;
}

Eigen::VectorXd collision_moments(const VelocityGrid& grid, const Eigen::MatrixXd& q,
                                  const SpeciesSet& species) {
  const auto inv = collision_invariants(grid, species);
  Eigen::VectorXd m(inv.size());
  for (std::size_t k = 0; k < inv.size(); ++k)
    m(k) = grid.cell_volume() * (inv[k].array() * q.array()).sum();
  return m;
}

CollisionResult conservative_projection(const CollisionResult& Q, const SpeciesSet& species) {
  const VelocityGrid& grid = Q.grid;
  const int N = species.size();
  require(Q.q.cols() == N && Q.q.rows() == grid.size(), "projection: result has the wrong shape");
  const auto inv = collision_invariants(grid, species);
  const int C = static_cast<int>(inv.size());
  const Eigen::Index len = grid.size() * N;
  Eigen::MatrixXd A(C, len);
  for (int k = 0; k < C; ++k)
    A.row(k) = grid.cell_volume() * Eigen::Map<const Eigen::VectorXd>(inv[k].data(), len).transpose();
  const Eigen::MatrixXd gram = A * A.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  const double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
  if (ldlt.info() != Eigen::Success || !(dmin > 1e-13 * dmax))
    throw NumericalError("conservative projection: singular constraint Gram matrix");
  Eigen::Map<const Eigen::VectorXd> qv(Q.q.data(), len);
  const Eigen::VectorXd residual = A * qv;
  const Eigen::VectorXd delta = A.transpose() * ldlt.solve(residual);
  CollisionResult out = Q;
  Eigen::Map<Eigen::VectorXd>(out.q.data(), len) -= delta;
  out.correction_norm = std::sqrt(grid.cell_volume()) * delta.norm();
  out.projected = true;
  return out;
}

}  // namespace kgen
