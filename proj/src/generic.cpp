#include "kgen/generic.hpp"

#include "kgen/quadrature.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace kgen {

PhaseGrid::PhaseGrid(int nx_points, const VelocityGrid& velocity) : nx(nx_points), v(velocity) {
  require(nx_points >= 2 && nx_points % 2 == 0, "phase grid needs an even number of x nodes");
}

Mixture PhaseField::slice(int x) const {
  require(x >= 0 && x < grid.nx, "phase field: slice index out of range");
  return {grid.v, values.middleRows(static_cast<Eigen::Index>(x) * grid.v.size(), grid.v.size())};
}

void PhaseField::set_slice(int x, const Eigen::MatrixXd& block) {
  require(block.rows() == grid.v.size() && block.cols() == values.cols(),
          "phase field: slice has the wrong shape");
  values.middleRows(static_cast<Eigen::Index>(x) * grid.v.size(), grid.v.size()) = block;
}

PhaseField make_phase_field(const PhaseGrid& grid, int species) {
  return {grid, Eigen::MatrixXd::Zero(grid.size(), species)};
}

double phase_inner(const PhaseGrid& grid, const Eigen::MatrixXd& xi, const Eigen::MatrixXd& eta) {
  require(xi.rows() == grid.size() && eta.rows() == grid.size() && xi.cols() == eta.cols(),
          "phase_inner: shape mismatch");
  return grid.cell_volume() * (xi.array() * eta.array()).sum();
}

double phase_norm(const PhaseGrid& grid, const Eigen::MatrixXd& xi) {
  return std::sqrt(phase_inner(grid, xi, xi));
}

double energy_E(const PhaseField& F, const SpeciesSet& species) {
  double e = 0.0;
  for (int x = 0; x < F.grid.nx; ++x) e += moments(F.slice(x), species).energy;
  return F.grid.dx() * e;
}

Velocity momentum_M(const PhaseField& F, const SpeciesSet& species) {
  Velocity p = Velocity::Zero(F.grid.v.dim());
  for (int x = 0; x < F.grid.nx; ++x) p += moments(F.slice(x), species).momentum;
  return F.grid.dx() * p;
}

double entropy_H(const PhaseField& F, const SpeciesSet& species) {
  double h = 0.0;
  for (int x = 0; x < F.grid.nx; ++x) {
    const double s = entropy_H(F.slice(x), species);
    if (s == HUGE_VAL) return HUGE_VAL;
    h += s;
  }
  return F.grid.dx() * h;
}

Eigen::MatrixXd dH(const PhaseField& F, const SpeciesSet& species) {
  Eigen::MatrixXd out(F.values.rows(), F.values.cols());
  const Eigen::Index S = F.grid.v.size();
  for (int x = 0; x < F.grid.nx; ++x)
    out.middleRows(x * S, S) = entropy_differential(F.slice(x), species);
  return out;
}

Eigen::MatrixXd dE(const PhaseGrid& grid, const SpeciesSet& species) {
  const Eigen::VectorXd speed2 = grid.v.nodes().rowwise().squaredNorm();
  const Eigen::Index S = grid.v.size();
  Eigen::MatrixXd out(grid.size(), species.size());
  for (int i = 0; i < species.size(); ++i)
    for (int x = 0; x < grid.nx; ++x) out.col(i).segment(x * S, S) = 0.5 * species.mass(i) * speed2;
  return out;
}

std::string to_string(Flavor f) {
  switch (f) {
    case Flavor::boltzmann:
      return "boltzmann";
    case Flavor::landau:
      return "landau";
    case Flavor::boltzmann_linear:
      return "boltzmann-linear";
    case Flavor::landau_linear:
      return "landau-linear";
  }
  return "?";
}

Flavor flavor_from_string(const std::string& name) {
  for (Flavor f : {Flavor::boltzmann, Flavor::landau, Flavor::boltzmann_linear, Flavor::landau_linear})
    if (to_string(f) == name) return f;
  throw PreconditionError("unknown operator '" + name +
                          "' (expected boltzmann, landau, boltzmann-linear or landau-linear)");
}

GenericBlocks::GenericBlocks(const SpeciesSet& species, const KernelSet& kernels,
                             const PhaseGrid& grid, const SphereQuadrature& squad)
    : species_(species),
      grid_(grid),
      boltz_(std::make_unique<BoltzmannOperator>(species, kernels, grid.v, squad)),
      landau_(std::make_unique<LandauOperator>(species, kernels, grid.v)) {
  const Eigen::MatrixXd D = fourier_derivative_matrix(grid.nx, 1.0);
  Dx_ = 0.5 * (D - D.transpose());  // antisymmetric to the last bit
}

// d_x applied to every species and velocity node
Eigen::MatrixXd GenericBlocks::dx_apply(const Eigen::MatrixXd& values) const {
  const Eigen::Index S = grid_.v.size();
  Eigen::MatrixXd out(values.rows(), values.cols());
  for (Eigen::Index i = 0; i < values.cols(); ++i) {
    Eigen::Map<const Eigen::MatrixXd> in(values.col(i).data(), S, grid_.nx);
    Eigen::Map<Eigen::MatrixXd> res(out.col(i).data(), S, grid_.nx);
    res.noalias() = in * Dx_.transpose();
  }
  return out;
}

Eigen::MatrixXd GenericBlocks::L_apply(const PhaseField& F, const Eigen::MatrixXd& xi) const {
  require(F.grid == grid_, "L_apply: field lives on a different phase grid");
  require(xi.rows() == grid_.size() && xi.cols() == species_.size(),
          "L_apply: argument has the wrong shape");
  const Eigen::Index S = grid_.v.size();
  const int N = species_.size();
  Eigen::MatrixXd a(grid_.size(), N);  // f d_{v_x} xi / m
  Eigen::MatrixXd b = dx_apply(xi);    // becomes f d_x xi / m
  for (int i = 0; i < N; ++i) {
    const double m = species_.mass(i);
    for (int x = 0; x < grid_.nx; ++x) {
      const auto f = F.values.col(i).segment(x * S, S);
      a.col(i).segment(x * S, S) =
          f.cwiseProduct(gradient_axis(grid_.v, xi.col(i).segment(x * S, S), 0)) / m;
      b.col(i).segment(x * S, S) = f.cwiseProduct(b.col(i).segment(x * S, S)) / m;
    }
  }
  Eigen::MatrixXd out = -dx_apply(a);
  for (int i = 0; i < N; ++i)
    for (int x = 0; x < grid_.nx; ++x)
      out.col(i).segment(x * S, S) -= gradient_axis_transpose(grid_.v, b.col(i).segment(x * S, S), 0);
  return out;
}

Eigen::MatrixXd GenericBlocks::M_apply(const PhaseField& F, const Eigen::MatrixXd& xi,
                                       Flavor flavor) const {
  require(F.grid == grid_, "M_apply: field lives on a different phase grid");
  require(xi.rows() == grid_.size() && xi.cols() == species_.size(),
          "M_apply: argument has the wrong shape");
  const Eigen::Index S = grid_.v.size();
  Eigen::MatrixXd out(grid_.size(), species_.size());
  for (int x = 0; x < grid_.nx; ++x) {
    const Mixture f = F.slice(x);
    const Eigen::MatrixXd z = xi.middleRows(x * S, S);
    switch (flavor) {
      case Flavor::boltzmann:
        out.middleRows(x * S, S) = boltz_->mobility(f, z);
        break;
      case Flavor::landau:
        out.middleRows(x * S, S) = landau_->mobility(f, z);
        break;
      case Flavor::boltzmann_linear:
        out.middleRows(x * S, S) = boltz_->mobility_linear(z);
        break;
      case Flavor::landau_linear:
        out.middleRows(x * S, S) = landau_->mobility_linear(z);
        break;
    }
  }
  return sign_fault_ ? Eigen::MatrixXd(-out) : out;
}

Eigen::MatrixXd GenericBlocks::dS(const PhaseField& F, Flavor flavor) const {
  if (is_linear(flavor)) return -F.values;
  return -dH(F, species_);
}

Eigen::MatrixXd GenericBlocks::generic_rhs(const PhaseField& F, Flavor flavor) const {
  return L_apply(F, dE(grid_, species_)) + M_apply(F, dS(F, flavor), flavor);
}

Eigen::MatrixXd GenericBlocks::transport(const PhaseField& F) const {
  const Eigen::Index S = grid_.v.size();
  const Eigen::VectorXd vx = grid_.v.nodes().col(0);
  Eigen::MatrixXd out = dx_apply(F.values);
  for (Eigen::Index i = 0; i < out.cols(); ++i)
    for (int x = 0; x < grid_.nx; ++x) out.col(i).segment(x * S, S).array() *= -vx.array();
  return out;
}

Eigen::MatrixXd random_smooth_field(const PhaseGrid& grid, int species, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int d = grid.v.dim();
  const Eigen::MatrixXd v = grid.v.nodes();
  const Eigen::Index S = grid.v.size();
  const double width = grid.v.half_width() / 3.0;
  Eigen::MatrixXd out(grid.size(), species);
  for (int i = 0; i < species; ++i) {
    // x modes 0..2, v monomials of degree <= 2
    double cx[5];
    for (double& c : cx) c = U(rng);
    Eigen::VectorXd shift(d);
    for (int c = 0; c < d; ++c) shift(c) = 0.3 * width * U(rng);
    const double c0 = U(rng);
    Eigen::VectorXd c1(d), c2(d);
    for (int c = 0; c < d; ++c) {
      c1(c) = U(rng);
      c2(c) = U(rng);
    }
    Eigen::VectorXd pv(S);
    for (Eigen::Index k = 0; k < S; ++k) {
      const Eigen::VectorXd w = (v.row(k).transpose() - shift) / width;
      const double poly = c0 + c1.dot(w) + c2.dot(w.cwiseProduct(w));
      pv(k) = poly * std::exp(-0.5 * w.squaredNorm());
    }
    for (int x = 0; x < grid.nx; ++x) {
      const double t = 2.0 * pi * grid.x(x);
      const double px = cx[0] + cx[1] * std::cos(t) + cx[2] * std::sin(t) + cx[3] * std::cos(2 * t) +
                        cx[4] * std::sin(2 * t);
      out.col(i).segment(x * S, S) = px * pv;
    }
  }
  return out;
}

DegeneracyReport degeneracy_report(const GenericBlocks& blocks, const PhaseField& F,
                                   const std::vector<Flavor>& flavors, int pairs,
                                   std::uint64_t seed) {
  const PhaseGrid& g = blocks.grid();
  const SpeciesSet& sp = blocks.species();
  const int N = sp.size();
  const double fnorm = phase_norm(g, F.values);
  require(fnorm > 0, "degeneracy_report: empty state");
  DegeneracyReport rep;
  rep.pairs = pairs;
  rep.l_dS = phase_norm(g, blocks.L_apply(F, -dH(F, sp))) / fnorm;

  std::vector<Eigen::MatrixXd> a, b;
  for (int p = 0; p < pairs; ++p) {
    a.push_back(random_smooth_field(g, N, seed + 2 * p));
    b.push_back(random_smooth_field(g, N, seed + 2 * p + 1));
  }
  for (int p = 0; p < pairs; ++p) {
    const double lab = phase_inner(g, a[p], blocks.L_apply(F, b[p]));
    const double lba = phase_inner(g, b[p], blocks.L_apply(F, a[p]));
    const double scale = phase_norm(g, a[p]) * phase_norm(g, b[p]) * fnorm;
    rep.antisymmetry = std::max(rep.antisymmetry, std::abs(lab + lba) / scale);
  }

  const Eigen::MatrixXd e = dE(g, sp);
  for (Flavor fl : flavors) {
    FlavorDefects fd;
    fd.flavor = fl;
    std::vector<Eigen::MatrixXd> Ma, Mb;
    for (int p = 0; p < pairs; ++p) {
      Ma.push_back(blocks.M_apply(F, a[p], fl));
      Mb.push_back(blocks.M_apply(F, b[p], fl));
      fd.scale = std::max({fd.scale, phase_norm(g, Ma[p]) / phase_norm(g, a[p]),
                           phase_norm(g, Mb[p]) / phase_norm(g, b[p])});
    }
    require(fd.scale > 0, "degeneracy_report: mobility vanishes on every test function");
    fd.m_dE = phase_norm(g, blocks.M_apply(F, e, fl)) / (phase_norm(g, e) * fd.scale);
    fd.psd_min = HUGE_VAL;
    for (int p = 0; p < pairs; ++p) {
      const double aa = phase_inner(g, a[p], Ma[p]), bb = phase_inner(g, b[p], Mb[p]);
      const double ab = phase_inner(g, a[p], Mb[p]), ba = phase_inner(g, b[p], Ma[p]);
      const double na = phase_norm(g, a[p]), nb = phase_norm(g, b[p]);
      fd.psd_min = std::min({fd.psd_min, aa / (na * na * fd.scale), bb / (nb * nb * fd.scale)});
      const double s = std::sqrt(std::abs(aa * bb));
      fd.symmetry = std::max(fd.symmetry, s > 0 ? std::abs(ab - ba) / s : std::abs(ab - ba));
    }
    rep.flavors.push_back(fd);
  }
  return rep;
}

PhaseField local_equilibrium_slab(const PhaseGrid& grid, const SpeciesSet& species) {
  PhaseField F = make_phase_field(grid, species.size());
  const int d = grid.v.dim();
  for (int x = 0; x < grid.nx; ++x) {
    const double s = std::sin(2 * pi * grid.x(x)), c = std::cos(2 * pi * grid.x(x));
    Velocity u = Velocity::Zero(d);
    u(0) = 0.3 * c;
    u(1) = 0.1 * s;
    Eigen::MatrixXd blk(grid.v.size(), species.size());
    for (int i = 0; i < species.size(); ++i)
      blk.col(i) = equilibrium(species, i, -0.5 + 0.2 * s + 0.1 * i, u, 1.0 + 0.2 * s, grid.v).values;
    F.set_slice(x, blk);
  }
  return F;
}

std::string format_report(const DegeneracyReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << std::scientific;
  os << "pairs: " << r.pairs << "\n";
  os << "L_dS_residual: " << r.l_dS << "\n";
  os << "L_antisymmetry_defect: " << r.antisymmetry << "\n";
  double r2 = 0.0;
  for (const auto& f : r.flavors) r2 = std::max(r2, f.m_dE);
  os << "r1: " << r.l_dS << "\n";
  if (!r.flavors.empty()) os << "r2: " << r2 << "\n";
  for (const auto& f : r.flavors) {
    const std::string k = to_string(f.flavor);
    os << k << ".M_dE_residual: " << f.m_dE << "\n";
    os << k << ".M_symmetry_defect: " << f.symmetry << "\n";
    os << k << ".M_psd_min: " << f.psd_min << "\n";
    os << k << ".M_scale: " << f.scale << "\n";
  }
  return os.str();
}

}  // namespace kgen
