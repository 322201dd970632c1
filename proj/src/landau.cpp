#include "kgen/landau.hpp"

#include "kgen/entropy.hpp"
#include "kgen/parallel.hpp"

#include <cmath>
#include <cstdlib>

namespace kgen {

Tensor pi_projection(const Velocity& vi, const Velocity& vj) {
  require(vi.size() == vj.size(), "pi_projection: dimension mismatch");
  const Velocity g = vi - vj;
  const double r2 = g.squaredNorm();
  if (r2 == 0.0) throw PreconditionError("pi_projection: coincident velocities");
  const int d = static_cast<int>(g.size());
  Tensor P = Tensor::Identity(d, d);
  P.noalias() -= g * g.transpose() / r2;
  return P;
}

Velocity grad_tilde(const Velocity& gi, const Velocity& gj, const Tensor& P, double mi, double mj) {
  require(mi > 0 && mj > 0, "grad_tilde: masses must be positive");
  return P * (gi / mi - gj / mj);
}

namespace {

std::array<int, 3> dims3(const VelocityGrid& g) {
  const int n = g.points();
  return g.dim() == 3 ? std::array<int, 3>{n, n, n} : std::array<int, 3>{1, n, n};
}

// fn(a, b, len): rows of the overlap where node a pairs with node b = a - o
template <typename Fn>
void for_rows(const std::array<int, 3>& dims, const std::array<int, 3>& o, Fn&& fn) {
  std::array<int, 3> lo{}, ext{};
  for (int ax = 0; ax < 3; ++ax) {
    lo[ax] = std::max(0, o[ax]);
    ext[ax] = dims[ax] - std::abs(o[ax]);
  }
  const long shift = (static_cast<long>(o[0]) * dims[1] + o[1]) * dims[2] + o[2];
  for (int i0 = 0; i0 < ext[0]; ++i0)
    for (int i1 = 0; i1 < ext[1]; ++i1) {
      const long a = (static_cast<long>(lo[0] + i0) * dims[1] + lo[1] + i1) * dims[2] + lo[2];
      fn(a, a - shift, ext[2]);
    }
}

std::vector<double> floors_of(const Mixture& F) {
  std::vector<double> fl(F.species_count());
  for (int i = 0; i < F.species_count(); ++i) fl[i] = density_floor * F.values.col(i).maxCoeff();
  return fl;
}

Eigen::MatrixXd occupancy(const Mixture& F, const SpeciesSet& species) {
  Eigen::MatrixXd u(F.values.rows(), F.values.cols());
  for (int i = 0; i < species.size(); ++i)
    u.col(i) = F.values.col(i).array() * (1.0 + species.alpha(i) * F.values.col(i).array());
  return u;
}

}  // namespace

LandauOperator::LandauOperator(const SpeciesSet& species, const KernelSet& kernels,
                               const VelocityGrid& grid)
    : species_(species), grid_(grid) {
  require(kernels.species_count() == species.size(), "kernel set does not match the species");
  const int d = grid.dim();
  const int n = grid.points();
  const int shift = 3 - d;
  const double h = grid.spacing();
  std::array<int, 3> lim{0, 0, 0};
  for (int c = 0; c < d; ++c) lim[shift + c] = n - 1;
  std::vector<double> radius;
  for (int o0 = -lim[0]; o0 <= lim[0]; ++o0)
    for (int o1 = -lim[1]; o1 <= lim[1]; ++o1)
      for (int o2 = -lim[2]; o2 <= lim[2]; ++o2) {
        if (o0 == 0 && o1 == 0 && o2 == 0) continue;  // Pi undefined on the diagonal
        Offset off;
        off.o = {o0, o1, o2};
        Velocity g(d);
        for (int c = 0; c < d; ++c) g(c) = h * off.o[shift + c];
        const double r2 = g.squaredNorm();
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) off.pi[c * d + e] = (c == e ? 1.0 : 0.0) - g(c) * g(e) / r2;
        offsets_.push_back(off);
        radius.push_back(std::sqrt(r2));
      }
  const int N = species.size();
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      const PairKernel& k = kernels(i, j);
      std::vector<double> w(offsets_.size());
      for (std::size_t t = 0; t < offsets_.size(); ++t) {
        const double r = radius[t];
        w[t] = r * r * k.radial(r);  // m_i A_ij
        require(w[t] >= 0, "radial kernel must be nonnegative");
      }
      weight_.push_back(std::move(w));
    }
}

int LandauOperator::pair_slot(int i, int j) const {
  if (i > j) std::swap(i, j);
  const int N = species_.size();
  return i * N - i * (i - 1) / 2 + (j - i);
}

std::vector<Eigen::MatrixXd> LandauOperator::gradients(const Eigen::MatrixXd& values) const {
  std::vector<Eigen::MatrixXd> out;
  for (int i = 0; i < species_.size(); ++i)
    out.push_back(grad_v(grid_, values.col(i)) / species_.mass(i));
  return out;
}

std::vector<Eigen::MatrixXd> LandauOperator::flux(const Eigen::MatrixXd& u,
                                                  const std::vector<Eigen::MatrixXd>& W, int only_i,
                                                  int only_j) const {
  const int N = species_.size();
  const int d = grid_.dim();
  const auto dims = dims3(grid_);
  const Eigen::Index size = grid_.size();
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if ((only_i < 0 || i == only_i) && (only_j < 0 || j == only_j)) pairs.emplace_back(i, j);

  std::vector<Eigen::MatrixXd> parts(pairs.size());
  parallel_chunks(static_cast<int>(pairs.size()), [&](int p) {
    const auto [i, j] = pairs[p];
    const std::vector<double>& w = weight_[pair_slot(i, j)];
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size, d);
    const double* ui = u.col(i).data();
    const double* uj = u.col(j).data();
    for (std::size_t t = 0; t < offsets_.size(); ++t) {
      if (w[t] == 0.0) continue;
      const Offset& off = offsets_[t];
      for (int c = 0; c < d; ++c) {
        double* fc = out.col(c).data();
        for (int e = 0; e < d; ++e) {
          const double k = w[t] * off.pi[c * d + e];
          if (k == 0.0) continue;
          const double* wi = W[i].col(e).data();
          const double* wj = W[j].col(e).data();
          for_rows(dims, off.o, [&](long a, long b, int len) {
            for (int s = 0; s < len; ++s)
              fc[a + s] += k * (uj[b + s] * wi[a + s] - ui[a + s] * wj[b + s]);
          });
        }
      }
    }
    parts[p] = std::move(out);
  });

  std::vector<Eigen::MatrixXd> fl(N, Eigen::MatrixXd::Zero(size, d));
  for (std::size_t p = 0; p < pairs.size(); ++p) fl[pairs[p].first] += parts[p];
  for (auto& f : fl) f *= grid_.cell_volume();
  return fl;
}

Eigen::MatrixXd LandauOperator::divergence(const std::vector<Eigen::MatrixXd>& flux) const {
  Eigen::MatrixXd q(grid_.size(), species_.size());
  for (int i = 0; i < species_.size(); ++i) q.col(i) = div_v(grid_, flux[i]) / species_.mass(i);
  return q;
}

double LandauOperator::pairing(const Eigen::MatrixXd& u, const std::vector<Eigen::MatrixXd>& W,
                               const std::vector<Eigen::MatrixXd>& P) const {
  const int N = species_.size();
  const int d = grid_.dim();
  const auto dims = dims3(grid_);
  std::vector<double> partial(N * N, 0.0);
  parallel_chunks(N * N, [&](int p) {
    const int i = p / N, j = p % N;
    const std::vector<double>& w = weight_[pair_slot(i, j)];
    const double* ui = u.col(i).data();
    const double* uj = u.col(j).data();
    double acc = 0.0;
    for (std::size_t t = 0; t < offsets_.size(); ++t) {
      if (w[t] == 0.0) continue;
      const Offset& off = offsets_[t];
      double sum = 0.0;
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          const double k = off.pi[c * d + e];
          if (k == 0.0) continue;
          const double *wi = W[i].col(c).data(), *wj = W[j].col(c).data();
          const double *pi = P[i].col(e).data(), *pj = P[j].col(e).data();
          double s2 = 0.0;
          for_rows(dims, off.o, [&](long a, long b, int len) {
            for (int s = 0; s < len; ++s)
              s2 += (uj[b + s] * wi[a + s] - ui[a + s] * wj[b + s]) * (pi[a + s] - pj[b + s]);
          });
          sum += k * s2;
        }
      acc += w[t] * sum;
    }
    partial[p] = acc;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  const double hd = grid_.cell_volume();
  return -0.5 * hd * hd * total;
}

double LandauOperator::squared_norm(const Eigen::MatrixXd& u, const std::vector<Eigen::MatrixXd>& X,
                                    const std::vector<double>& floors) const {
  const int N = species_.size();
  const int d = grid_.dim();
  const auto dims = dims3(grid_);
  std::vector<double> partial(N * N, 0.0);
  parallel_chunks(N * N, [&](int p) {
    const int i = p / N, j = p % N;
    const std::vector<double>& w = weight_[pair_slot(i, j)];
    const double* ui = u.col(i).data();
    const double* uj = u.col(j).data();
    const double li = floors.empty() ? -HUGE_VAL : floors[i];
    const double lj = floors.empty() ? -HUGE_VAL : floors[j];
    double acc = 0.0;
    for (std::size_t t = 0; t < offsets_.size(); ++t) {
      if (w[t] == 0.0) continue;
      const Offset& off = offsets_[t];
      double sum = 0.0;
      for_rows(dims, off.o, [&](long a, long b, int len) {
        for (int s = 0; s < len; ++s) {
          const double ua = ui[a + s], ub = uj[b + s];
          if (ua <= li || ub <= lj) continue;
          double z[3];
          for (int c = 0; c < d; ++c) z[c] = X[i](a + s, c) - X[j](b + s, c);
          double q = 0.0;
          for (int c = 0; c < d; ++c) {
            double pz = 0.0;
            for (int e = 0; e < d; ++e) pz += off.pi[c * d + e] * z[e];
            q += pz * pz;
          }
          sum += ua * ub * q;
        }
      });
      acc += w[t] * sum;
    }
    partial[p] = acc;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  const double hd = grid_.cell_volume();
  return 0.5 * hd * hd * total;
}

std::vector<Eigen::MatrixXd> LandauOperator::entropy_fluxes(const Mixture& F,
                                                            const Eigen::MatrixXd& u) const {
  auto W = gradients(entropy_differential(F, species_));
  for (int i = 0; i < species_.size(); ++i) W[i] = W[i].array().colwise() * u.col(i).array();
  return W;
}

Eigen::VectorXd LandauOperator::q_pair(const Mixture& F, int i, int j) const {
  require(F.grid == grid_, "q_landau_pair: mixture lives on a different grid");
  validate(F, species_);
  const int N = species_.size();
  require(i >= 0 && j >= 0 && i < N && j < N, "q_landau_pair: species index out of range");
  const Eigen::MatrixXd u = occupancy(F, species_);
  const auto fl = flux(u, entropy_fluxes(F, u), i, j);
  return div_v(grid_, fl[i]) / species_.mass(i);
}

CollisionResult LandauOperator::q_total(const Mixture& F, bool project) const {
  require(F.grid == grid_, "q_landau_total: mixture lives on a different grid");
  validate(F, species_);
  const int N = species_.size();
  CollisionResult res;
  res.grid = grid_;
  const Eigen::MatrixXd u = occupancy(F, species_);
  const auto W = entropy_fluxes(F, u);
  res.q = Eigen::MatrixXd::Zero(grid_.size(), N);
  res.pair_norms = Eigen::MatrixXd::Zero(N, N);
  const double w = std::sqrt(grid_.cell_volume());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const auto fl = flux(u, W, i, j);
      const Eigen::VectorXd qij = div_v(grid_, fl[i]) / species_.mass(i);
      res.pair_norms(i, j) = w * qij.norm();
      res.q.col(i) += qij;
    }
  return project ? conservative_projection(res, species_) : res;
}

double LandauOperator::weak_form(const Mixture& F, const Eigen::MatrixXd& phi) const {
  require(F.grid == grid_, "weak_form_L: mixture lives on a different grid");
  validate(F, species_);
  require(phi.rows() == grid_.size() && phi.cols() == species_.size(),
          "weak_form_L: test function has the wrong shape");
  const Eigen::MatrixXd u = occupancy(F, species_);
  return pairing(u, entropy_fluxes(F, u), gradients(phi));
}

double LandauOperator::dissipation(const Mixture& F) const {
  require(F.grid == grid_, "entropy_dissipation_L: mixture lives on a different grid");
  validate(F, species_);
  return squared_norm(occupancy(F, species_), gradients(entropy_differential(F, species_)),
                      floors_of(F));
}

Eigen::MatrixXd LandauOperator::mobility(const Mixture& F, const Eigen::MatrixXd& xi) const {
  require(F.grid == grid_, "mobility: mixture lives on a different grid");
  validate(F, species_);
  require(xi.rows() == grid_.size() && xi.cols() == species_.size(),
          "mobility: argument has the wrong shape");
  const Eigen::MatrixXd u = occupancy(F, species_);
  auto W = gradients(xi);
  for (int i = 0; i < species_.size(); ++i) W[i] = W[i].array().colwise() * u.col(i).array();
  return -divergence(flux(u, W));
}

Eigen::MatrixXd LandauOperator::mobility_linear(const Eigen::MatrixXd& xi) const {
  require(xi.rows() == grid_.size() && xi.cols() == species_.size(),
          "mobility_linear: argument has the wrong shape");
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(grid_.size(), species_.size());
  return -divergence(flux(ones, gradients(xi)));
}

CollisionResult LandauOperator::q_linear(const Mixture& F, bool project) const {
  require(F.grid == grid_, "q_linear_L: mixture lives on a different grid");
  CollisionResult res;
  res.grid = grid_;
  res.q = -mobility_linear(F.values);
  res.pair_norms = Eigen::MatrixXd::Zero(species_.size(), species_.size());
  return project ? conservative_projection(res, species_) : res;
}

double LandauOperator::dissipation_linear(const Mixture& F) const {
  require(F.grid == grid_, "dissipation_linear: mixture lives on a different grid");
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(grid_.size(), species_.size());
  return squared_norm(ones, gradients(F.values), {});
}

double LandauOperator::weak_form_linear(const Mixture& F, const Eigen::MatrixXd& phi) const {
  require(F.grid == grid_, "weak_form_linear: mixture lives on a different grid");
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(grid_.size(), species_.size());
  return pairing(ones, gradients(F.values), gradients(phi));
}

Eigen::VectorXd q_landau_pair(const Mixture& F, int i, int j, const SpeciesSet& species,
                              const KernelSet& kernels) {
  return LandauOperator(species, kernels, F.grid).q_pair(F, i, j);
}

CollisionResult q_landau_total(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels,
                               bool project) {
  return LandauOperator(species, kernels, F.grid).q_total(F, project);
}

double weak_form_L(const Mixture& F, const Eigen::MatrixXd& phi, const SpeciesSet& species,
                   const KernelSet& kernels) {
  return LandauOperator(species, kernels, F.grid).weak_form(F, phi);
}

double entropy_dissipation_L(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels) {
  return LandauOperator(species, kernels, F.grid).dissipation(F);
}

CollisionResult q_linear_L(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels) {
  return LandauOperator(species, kernels, F.grid).q_linear(F);
}

}  // namespace kgen
