#include "kgen/velocity_grid.hpp"

#include "kgen/quadrature.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace kgen {

VelocityGrid::VelocityGrid(int dim, int n, double half_width) {
  require(dim == 2 || dim == 3, "velocity grid dimension must be 2 or 3");
  require(n >= 8, "velocity grid needs at least 8 points per axis");
  require(n % 2 == 0, "velocity grid points per axis must be even");
  require(half_width > 0 && std::isfinite(half_width), "velocity grid half-width must be positive");
  dim_ = dim;
  n_ = n;
  L_ = half_width;
  h_ = 2.0 * half_width / n;
  vol_ = std::pow(h_, dim);
  size_ = 1;
  for (int a = dim - 1; a >= 0; --a) {
    stride_[a] = size_;
    size_ *= n;
  }
}

VelocityGrid build_grid(int dim, int n, double half_width) { return VelocityGrid(dim, n, half_width); }

std::array<int, 3> VelocityGrid::unflatten(Eigen::Index flat) const {
  std::array<int, 3> k{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    k[a] = static_cast<int>(flat / stride_[a]);
    flat %= stride_[a];
  }
  return k;
}

Eigen::Index VelocityGrid::flatten(const std::array<int, 3>& k) const {
  Eigen::Index flat = 0;
  for (int a = 0; a < dim_; ++a) flat += k[a] * stride_[a];
  return flat;
}

Velocity VelocityGrid::node(Eigen::Index flat) const {
  const auto k = unflatten(flat);
  Velocity v(dim_);
  for (int a = 0; a < dim_; ++a) v(a) = coordinate(k[a]);
  return v;
}

Eigen::MatrixXd VelocityGrid::nodes() const {
  Eigen::MatrixXd out(size_, dim_);
  for (Eigen::Index r = 0; r < size_; ++r) out.row(r) = node(r).transpose();
  return out;
}

Mixture make_mixture(const std::vector<Field>& fields) {
  require(!fields.empty(), "mixture needs at least one field");
  Mixture m;
  m.grid = fields.front().grid;
  m.values.resize(m.grid.size(), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!(fields[i].grid == m.grid)) throw PreconditionError("fields live on different grids");
    require(fields[i].values.size() == m.grid.size(), "field size does not match its grid");
    m.values.col(static_cast<Eigen::Index>(i)) = fields[i].values;
  }
  return m;
}

void validate(const Mixture& F, const SpeciesSet& species) {
  require(F.species_count() == species.size(), "mixture and species set disagree on N");
  require(F.values.rows() == F.grid.size(), "mixture size does not match its grid");
  for (int i = 0; i < species.size(); ++i) {
    for (Eigen::Index k = 0; k < F.values.rows(); ++k) {
      const double f = F.values(k, i);
      if (!(f >= 0.0))
        throw PreconditionError("species " + std::to_string(i + 1) + ": negative density at node " +
                                std::to_string(k));
      if (species.alpha(i) == -1 && f > 1.0)
        throw PreconditionError("Fermi overflow: species " + std::to_string(i + 1) +
                                " exceeds 1 at node " + std::to_string(k));
    }
  }
}

AxisStencil axis_stencil(const VelocityGrid& grid, double x) {
  AxisStencil st;
  const double L = grid.half_width();
  if (!(x >= -L && x <= L)) return st;
  const int n = grid.points();
  const double s = (x + L) / grid.spacing() - 0.5;
  int base = static_cast<int>(std::floor(s)) - 1;
  base = std::clamp(base, 0, n - 4);
  const double t = s - base;
  st.inside = true;
  st.base = base;
  const double t0 = t, t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
  st.w[0] = -t1 * t2 * t3 / 6.0;
  st.w[1] = t0 * t2 * t3 / 2.0;
  st.w[2] = -t0 * t1 * t3 / 2.0;
  st.w[3] = t0 * t1 * t2 / 6.0;
  return st;
}

double interpolate(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& values,
                   const Velocity& v, InterpMode mode) {
  const int d = grid.dim();
  require(v.size() == d, "interpolate: point has the wrong dimension");
  std::array<AxisStencil, 3> st;
  for (int a = 0; a < d; ++a) {
    st[a] = axis_stencil(grid, v(a));
    if (!st[a].inside) return 0.0;
  }
  double sum = 0.0;
  if (d == 2) {
    for (int p = 0; p < 4; ++p) {
      double row = 0.0;
      const Eigen::Index r = (st[0].base + p) * grid.stride(0) + st[1].base;
      for (int q = 0; q < 4; ++q) row += st[1].w[q] * values(r + q);
      sum += st[0].w[p] * row;
    }
  } else {
    for (int p = 0; p < 4; ++p) {
      double plane = 0.0;
      for (int q = 0; q < 4; ++q) {
        double row = 0.0;
        const Eigen::Index r =
            (st[0].base + p) * grid.stride(0) + (st[1].base + q) * grid.stride(1) + st[2].base;
        for (int s = 0; s < 4; ++s) row += st[2].w[s] * values(r + s);
        plane += st[1].w[q] * row;
      }
      sum += st[0].w[p] * plane;
    }
  }
  return mode == InterpMode::clamped ? std::max(sum, 0.0) : sum;
}

namespace {

struct Stencil1D {
  int first;
  std::array<double, 5> c;
  int len;
};

// Row k of the 1D derivative matrix (times 12h).
Stencil1D derivative_row(int k, int n) {
  if (k >= 2 && k <= n - 3) return {k - 2, {1, -8, 0, 8, -1}, 5};
  if (k == 0) return {0, {-25, 48, -36, 16, -3}, 5};
  if (k == 1) return {0, {-3, -10, 18, -6, 1}, 5};
  if (k == n - 2) return {n - 5, {-1, 6, -18, 10, 3}, 5};
  return {n - 5, {3, -16, 36, -48, 25}, 5};
}

}  // namespace

Eigen::VectorXd gradient_axis(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                              int axis) {
  const int n = grid.points();
  const Eigen::Index stride = grid.stride(axis);
  const double scale = 1.0 / (12.0 * grid.spacing());
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index idx = 0; idx < grid.size(); ++idx) {
    const int k = static_cast<int>((idx / stride) % n);
    const Eigen::Index line0 = idx - k * stride;
    const Stencil1D st = derivative_row(k, n);
    double acc = 0.0;
    for (int t = 0; t < st.len; ++t) acc += st.c[t] * f(line0 + (st.first + t) * stride);
    out(idx) = acc * scale;
  }
  return out;
}

Eigen::VectorXd gradient_axis_transpose(const VelocityGrid& grid,
                                        const Eigen::Ref<const Eigen::VectorXd>& g, int axis) {
  const int n = grid.points();
  const Eigen::Index stride = grid.stride(axis);
  const double scale = 1.0 / (12.0 * grid.spacing());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size());
  for (Eigen::Index idx = 0; idx < grid.size(); ++idx) {
    const int k = static_cast<int>((idx / stride) % n);
    const Eigen::Index line0 = idx - k * stride;
    const Stencil1D st = derivative_row(k, n);
    const double v = g(idx) * scale;
    for (int t = 0; t < st.len; ++t) out(line0 + (st.first + t) * stride) += st.c[t] * v;
  }
  return out;
}

Eigen::MatrixXd grad_v(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f) {
  Eigen::MatrixXd out(grid.size(), grid.dim());
  for (int a = 0; a < grid.dim(); ++a) out.col(a) = gradient_axis(grid, f, a);
  return out;
}

Eigen::MatrixXd grad_v(const Field& f) { return grad_v(f.grid, f.values); }

Eigen::VectorXd div_v(const VelocityGrid& grid, const Eigen::MatrixXd& flux) {
  require(flux.rows() == grid.size() && flux.cols() == grid.dim(), "div_v: flux has the wrong shape");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size());
  for (int a = 0; a < grid.dim(); ++a) out -= gradient_axis_transpose(grid, flux.col(a), a);
  return out;
}

Moments moments(const Mixture& F, const SpeciesSet& species) {
  require(F.species_count() == species.size(), "moments: mixture and species set disagree");
  const VelocityGrid& g = F.grid;
  const Eigen::MatrixXd v = g.nodes();
  const Eigen::VectorXd speed2 = v.rowwise().squaredNorm();
  Moments m;
  m.mass = g.cell_volume() * F.values.colwise().sum().transpose();
  m.momentum = Velocity::Zero(g.dim());
  m.energy = 0.0;
  for (int i = 0; i < species.size(); ++i) {
    const double mi = species.mass(i);
    m.momentum += mi * g.cell_volume() * (v.transpose() * F.values.col(i));
    m.energy += 0.5 * mi * g.cell_volume() * speed2.dot(F.values.col(i));
  }
  return m;
}

Field equilibrium(const SpeciesSet& species, int i, double mu, const Velocity& u, double T,
                  const VelocityGrid& grid) {
  require(T > 0, "equilibrium: temperature must be positive");
  require(u.size() == grid.dim(), "equilibrium: bulk velocity has the wrong dimension");
  const double m = species.mass(i);
  const int alpha = species.alpha(i);
  Field f{grid, Eigen::VectorXd(grid.size())};
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double arg = (0.5 * m * (grid.node(k) - u).squaredNorm() - mu) / T;
    if (alpha == 1 && !(arg > 0))
      throw PreconditionError("Bose condensation regime not representable");
    f.values(k) = alpha == 0 ? std::exp(-arg) : 1.0 / (std::exp(arg) - alpha);
  }
  return f;
}

SphereQuadrature sphere_quadrature(int dim, int K) {
  require(dim == 2 || dim == 3, "sphere quadrature dimension must be 2 or 3");
  require(K >= 8, "sphere quadrature needs K >= 8");
  require(K % 2 == 0, "sphere quadrature needs an even K");
  SphereQuadrature sq;
  sq.dim = dim;
  sq.K = K;
  if (dim == 2) {
    sq.nodes.resize(2, K);
    sq.weights = Eigen::VectorXd::Constant(K, 2.0 * pi / K);
    for (int q = 0; q < K; ++q) {
      const double phi = 2.0 * pi * (q + 0.5) / K;
      sq.nodes(0, q) = std::cos(phi);
      sq.nodes(1, q) = std::sin(phi);
    }
    sq.exact_degree = K - 1;
    return sq;
  }
  const GaussRule gl = gauss_legendre(K);
  const int M = 2 * K;
  sq.nodes.resize(3, K * M);
  sq.weights.resize(K * M);
  for (int a = 0; a < K; ++a) {
    const double mu = gl.nodes(a);
    const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    for (int l = 0; l < M; ++l) {
      const double phi = 2.0 * pi * (l + 0.5) / M;
      const int q = a * M + l;
      sq.nodes(0, q) = mu;
      sq.nodes(1, q) = s * std::cos(phi);
      sq.nodes(2, q) = s * std::sin(phi);
      sq.weights(q) = gl.weights(a) * 2.0 * pi / M;
    }
  }
  sq.exact_degree = 2 * K - 1;
  return sq;
}

namespace {

void put_le(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  os.write(bytes, 8);
}

double get_le(std::istream& is) {
  char bytes[8];
  is.read(bytes, 8);
  if (!is) throw PreconditionError("field snapshot: truncated payload");
  std::uint64_t bits;
  std::memcpy(&bits, bytes, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_field(std::ostream& os, const Field& f, int species_index) {
  std::ostringstream header;
  header.precision(17);
  header << "kgen-field 1\n"
         << "dim " << f.grid.dim() << "\n"
         << "points " << f.grid.points() << "\n"
         << "half_width " << f.grid.half_width() << "\n"
         << "species " << species_index << "\n"
         << "payload float64-le " << f.values.size() << "\n";
  os << header.str();
  for (Eigen::Index k = 0; k < f.values.size(); ++k) put_le(os, f.values(k));
}

Field read_field(std::istream& is, int* species_index) {
  std::string line, key;
  auto expect = [&](const std::string& name) {
    if (!std::getline(is, line)) throw PreconditionError("field snapshot: missing " + name);
    std::istringstream ls(line);
    ls >> key;
    if (key != name) throw PreconditionError("field snapshot: expected " + name + ", got " + key);
    return ls.str().substr(key.size());
  };
  expect("kgen-field");
  const int dim = std::stoi(expect("dim"));
  const int n = std::stoi(expect("points"));
  const double L = std::stod(expect("half_width"));
  const int species = std::stoi(expect("species"));
  std::istringstream payload(expect("payload"));
  std::string fmt;
  long count = 0;
  payload >> fmt >> count;
  if (fmt != "float64-le") throw PreconditionError("field snapshot: unknown payload format " + fmt);
  Field f{build_grid(dim, n, L), Eigen::VectorXd()};
  if (count != f.grid.size()) throw PreconditionError("field snapshot: payload size mismatch");
  f.values.resize(count);
  for (long k = 0; k < count; ++k) f.values(k) = get_le(is);
  if (species_index) *species_index = species;
  return f;
}

void write_field_csv(std::ostream& os, const Field& f) {
  const int d = f.grid.dim();
  for (int a = 0; a < d; ++a) os << "v" << (a + 1) << ",";
  os << "f\n";
  char buf[64];
  for (Eigen::Index k = 0; k < f.grid.size(); ++k) {
    const Velocity v = f.grid.node(k);
    for (int a = 0; a < d; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g,", v(a));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", f.values(k));
    os << buf;
  }
}

}  // namespace kgen
