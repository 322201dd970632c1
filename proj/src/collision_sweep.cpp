#include "collision_sweep.hpp"

#include "kgen/parallel.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

namespace kgen::detail {

void build_axis_map(const VelocityGrid& grid, int out_lo, int count, double shift, AxisMap& map) {
  map.identity = false;
  map.out_lo = out_lo;
  map.count = count;
  map.base.resize(count);
  map.w.resize(count);
  const int n = grid.points();
  // Inside the box every stencil sees the same fractional offset.
  const double u = shift / grid.spacing();
  const double fl = std::floor(u);
  const double t = u - fl + 1.0;
  const double t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
  const std::array<double, 4> wi{-t1 * t2 * t3 / 6.0, t * t2 * t3 / 2.0, -t * t1 * t3 / 2.0,
                                 t * t1 * t2 / 6.0};
  const int off = static_cast<int>(fl) - 1 + out_lo;  // base of output c is c + off
  int lo = INT_MAX, hi = -1;
  map.fast_lo = std::clamp(-off, 0, count);
  map.fast_hi = std::clamp(n - 4 - off + 1, map.fast_lo, count);
  for (int c = 0; c < count; ++c) {
    if (c >= map.fast_lo && c < map.fast_hi) {
      map.base[c] = c + off;
      map.w[c] = wi;
    } else {
      const AxisStencil st = axis_stencil(grid, grid.coordinate(out_lo + c) + shift);
      if (!st.inside) {
        map.base[c] = -1;
        continue;
      }
      map.base[c] = st.base;
      map.w[c] = st.w;
    }
    lo = std::min(lo, map.base[c]);
    hi = std::max(hi, map.base[c]);
  }
  map.w_fast = wi;
  if (hi < 0) {
    map.src_lo = 0;
    map.src_count = 0;
    map.fast_lo = map.fast_hi = 0;
    return;
  }
  map.src_lo = lo;
  map.src_count = hi + 4 - lo;
  map.fast_base = off - lo;
  for (int c = 0; c < count; ++c)
    if (map.base[c] >= 0) map.base[c] -= lo;
}

namespace {

void identity_map(AxisMap& m) {
  m.identity = true;
  m.out_lo = 0;
  m.count = 1;
  m.src_lo = 0;
  m.src_count = 1;
  m.base.assign(1, 0);
  m.w.assign(1, {1.0, 0.0, 0.0, 0.0});
  m.fast_lo = m.fast_hi = 0;
}

// element (i0, i1, i2) of a view sits at p[i0*s0 + i1*s1 + i2]
struct View {
  const double* p;
  long s0, s1;
};

struct OutView {
  double* p;
  long s0, s1;
};

// axis 0: (S0,S1,S2) -> (R0,S1,S2)
void pass0(View in, int S1, int S2, const AxisMap& m, double* out) {
  for (int k = 0; k < m.count; ++k) {
    double* o = out + static_cast<long>(k) * S1 * S2;
    const int b = m.base[k];
    if (b < 0) {
      std::fill(o, o + static_cast<long>(S1) * S2, 0.0);
      continue;
    }
    const auto& w = m.w[k];
    for (int i1 = 0; i1 < S1; ++i1) {
      const double* r0 = in.p + b * in.s0 + i1 * in.s1;
      const double* r1 = r0 + in.s0;
      const double* r2 = r1 + in.s0;
      const double* r3 = r2 + in.s0;
      double* ro = o + static_cast<long>(i1) * S2;
      for (int i2 = 0; i2 < S2; ++i2)
        ro[i2] = w[0] * r0[i2] + w[1] * r1[i2] + w[2] * r2[i2] + w[3] * r3[i2];
    }
  }
}

// axis 1: (R0,S1,S2) -> (R0,R1,S2)
void pass1(View in, int R0, int S2, const AxisMap& m, double* out) {
  for (int i0 = 0; i0 < R0; ++i0) {
    for (int k = 0; k < m.count; ++k) {
      double* ro = out + (static_cast<long>(i0) * m.count + k) * S2;
      const int b = m.base[k];
      if (b < 0) {
        std::fill(ro, ro + S2, 0.0);
        continue;
      }
      const auto& w = m.w[k];
      const double* r0 = in.p + i0 * in.s0 + b * in.s1;
      const double* r1 = r0 + in.s1;
      const double* r2 = r1 + in.s1;
      const double* r3 = r2 + in.s1;
      for (int i2 = 0; i2 < S2; ++i2)
        ro[i2] = w[0] * r0[i2] + w[1] * r1[i2] + w[2] * r2[i2] + w[3] * r3[i2];
    }
  }
}

// axis 2: (R0,R1,S2) -> (R0,R1,R2)
void pass2(View in, int R0, int R1, const AxisMap& m, double* out) {
  const int R2 = m.count;
  const auto& wf = m.w_fast;
  for (int i0 = 0; i0 < R0; ++i0) {
    for (int i1 = 0; i1 < R1; ++i1) {
      const double* row = in.p + i0 * in.s0 + i1 * in.s1;
      double* ro = out + (static_cast<long>(i0) * R1 + i1) * R2;
      for (int k = 0; k < m.fast_lo; ++k) {
        const int b = m.base[k];
        const auto& w = m.w[k];
        ro[k] = b < 0 ? 0.0 : w[0] * row[b] + w[1] * row[b + 1] + w[2] * row[b + 2] + w[3] * row[b + 3];
      }
      const double* r = row + m.fast_base;
      for (int k = m.fast_lo; k < m.fast_hi; ++k)
        ro[k] = wf[0] * r[k] + wf[1] * r[k + 1] + wf[2] * r[k + 2] + wf[3] * r[k + 3];
      for (int k = m.fast_hi; k < R2; ++k) {
        const int b = m.base[k];
        const auto& w = m.w[k];
        ro[k] = b < 0 ? 0.0 : w[0] * row[b] + w[1] * row[b + 1] + w[2] * row[b + 2] + w[3] * row[b + 3];
      }
    }
  }
}

// transpose of pass2: (R0,R1,R2) -> (R0,R1,S2), out zeroed by caller
void tpass2(const double* x, int R0, int R1, const AxisMap& m, OutView out, double sign) {
  const int R2 = m.count;
  const auto& wf = m.w_fast;
  auto slow = [&](const double* row, double* ro, int k) {
    const int b = m.base[k];
    if (b < 0) return;
    const double v = sign * row[k];
    const auto& w = m.w[k];
    ro[b] += w[0] * v;
    ro[b + 1] += w[1] * v;
    ro[b + 2] += w[2] * v;
    ro[b + 3] += w[3] * v;
  };
  for (int i0 = 0; i0 < R0; ++i0) {
    for (int i1 = 0; i1 < R1; ++i1) {
      const double* row = x + (static_cast<long>(i0) * R1 + i1) * R2;
      double* ro = out.p + i0 * out.s0 + i1 * out.s1;
      for (int k = 0; k < m.fast_lo; ++k) slow(row, ro, k);
      for (int k = m.fast_hi; k < R2; ++k) slow(row, ro, k);
      // gather form of the interior scatter: target j collects k = j - base - t
      if (m.fast_hi > m.fast_lo) {
        double* r = ro + m.fast_base;
        const int lo = m.fast_lo, hi = m.fast_hi;
        for (int t = 0; t < 4; ++t) {
          const double c = sign * wf[t];
          double* rt = r + t;
          for (int k = lo; k < hi; ++k) rt[k] += c * row[k];
        }
      }
    }
  }
}

// transpose of pass1: (R0,R1,S2) -> (R0,S1,S2)
void tpass1(const double* x, int R0, int S2, const AxisMap& m, OutView out, double sign) {
  for (int i0 = 0; i0 < R0; ++i0) {
    for (int k = 0; k < m.count; ++k) {
      const int b = m.base[k];
      if (b < 0) continue;
      const double* ri = x + (static_cast<long>(i0) * m.count + k) * S2;
      const auto& w = m.w[k];
      for (int t = 0; t < 4; ++t) {
        double* ro = out.p + i0 * out.s0 + (b + t) * out.s1;
        const double c = sign * w[t];
        for (int i2 = 0; i2 < S2; ++i2) ro[i2] += c * ri[i2];
      }
    }
  }
}

// transpose of pass0: (R0,S1,S2) -> (S0,S1,S2)
void tpass0(const double* x, int S1, int S2, const AxisMap& m, OutView out, double sign) {
  for (int k = 0; k < m.count; ++k) {
    const int b = m.base[k];
    if (b < 0) continue;
    const double* xk = x + static_cast<long>(k) * S1 * S2;
    const auto& w = m.w[k];
    for (int t = 0; t < 4; ++t) {
      const double c = sign * w[t];
      for (int i1 = 0; i1 < S1; ++i1) {
        double* ro = out.p + (b + t) * out.s0 + i1 * out.s1;
        const double* ri = xk + static_cast<long>(i1) * S2;
        for (int i2 = 0; i2 < S2; ++i2) ro[i2] += c * ri[i2];
      }
    }
  }
}

std::array<int, 3> dims3(const VelocityGrid& grid) {
  const int n = grid.points();
  return grid.dim() == 3 ? std::array<int, 3>{n, n, n} : std::array<int, 3>{1, n, n};
}

}  // namespace

Shifter::Shifter(const VelocityGrid& grid) : dims_(dims3(grid)) {
  const long total = static_cast<long>(dims_[0]) * dims_[1] * dims_[2];
  buf_a_.resize(total);
  buf_b_.resize(total);
}

void Shifter::gather(const double* field, const std::array<AxisMap, 3>& m, double* out) {
  const long N2 = dims_[2], N12 = static_cast<long>(dims_[1]) * dims_[2];
  const int R0 = m[0].count, R1 = m[1].count, R2 = m[2].count;
  if (m[1].src_count == 0 || m[2].src_count == 0 || m[0].src_count == 0) {
    std::fill(out, out + static_cast<long>(R0) * R1 * R2, 0.0);
    return;
  }
  const int S1 = m[1].src_count, S2 = m[2].src_count;
  View v{field + m[0].src_lo * N12 + m[1].src_lo * N2 + m[2].src_lo, N12, N2};
  if (!m[0].identity) {
    pass0(v, S1, S2, m[0], buf_a_.data());
    v = {buf_a_.data(), static_cast<long>(S1) * S2, S2};
  }
  pass1(v, R0, S2, m[1], buf_b_.data());
  pass2({buf_b_.data(), static_cast<long>(R1) * S2, S2}, R0, R1, m[2], out);
}

void Shifter::scatter_sub(const double* x, const std::array<AxisMap, 3>& m, double* field) {
  const long N2 = dims_[2], N12 = static_cast<long>(dims_[1]) * dims_[2];
  if (m[1].src_count == 0 || m[2].src_count == 0 || m[0].src_count == 0) return;
  const int R0 = m[0].count, R1 = m[1].count;
  const int S1 = m[1].src_count, S2 = m[2].src_count;
  double* target = field + m[0].src_lo * N12 + m[1].src_lo * N2 + m[2].src_lo;

  std::fill(buf_b_.begin(), buf_b_.begin() + static_cast<long>(R0) * R1 * S2, 0.0);
  tpass2(x, R0, R1, m[2], {buf_b_.data(), static_cast<long>(R1) * S2, S2}, 1.0);
  if (m[0].identity) {
    tpass1(buf_b_.data(), R0, S2, m[1], {target, N12, N2}, -1.0);
    return;
  }
  std::fill(buf_a_.begin(), buf_a_.begin() + static_cast<long>(R0) * S1 * S2, 0.0);
  tpass1(buf_b_.data(), R0, S2, m[1], {buf_a_.data(), static_cast<long>(S1) * S2, S2}, 1.0);
  tpass0(buf_a_.data(), S1, S2, m[0], {target, N12, N2}, -1.0);
}

void copy_rect(const VelocityGrid& grid, const double* field, const std::array<int, 3>& lo,
               const std::array<int, 3>& extent, double* rect) {
  const auto dims = dims3(grid);
  const long N2 = dims[2], N12 = static_cast<long>(dims[1]) * dims[2];
  for (int i0 = 0; i0 < extent[0]; ++i0)
    for (int i1 = 0; i1 < extent[1]; ++i1) {
      const double* src = field + (lo[0] + i0) * N12 + (lo[1] + i1) * N2 + lo[2];
      std::copy(src, src + extent[2], rect);
      rect += extent[2];
    }
}

void add_rect(const VelocityGrid& grid, const double* rect, const std::array<int, 3>& lo,
              const std::array<int, 3>& extent, double* field) {
  const auto dims = dims3(grid);
  const long N2 = dims[2], N12 = static_cast<long>(dims[1]) * dims[2];
  for (int i0 = 0; i0 < extent[0]; ++i0)
    for (int i1 = 0; i1 < extent[1]; ++i1) {
      double* dst = field + (lo[0] + i0) * N12 + (lo[1] + i1) * N2 + lo[2];
      for (int i2 = 0; i2 < extent[2]; ++i2) dst[i2] += rect[i2];
      rect += extent[2];
    }
}

namespace {

Tensor collision_frame(const Velocity& k) {
  const int d = static_cast<int>(k.size());
  Tensor frame(d, d);
  frame.col(0) = k;
  if (d == 2) {
    frame(0, 1) = -k(1);
    frame(1, 1) = k(0);
    return frame;
  }
  int a = 0;
  for (int c = 1; c < 3; ++c)
    if (std::abs(k(c)) < std::abs(k(a))) a = c;
  Eigen::Vector3d kk(k(0), k(1), k(2));
  Eigen::Vector3d e1 = kk.cross(Eigen::Vector3d::Unit(a)).normalized();
  Eigen::Vector3d e2 = kk.cross(e1);
  frame.col(1) = e1;
  frame.col(2) = e2;
  return frame;
}

// first nonzero component positive
bool positive_half(const std::array<int, 3>& o) {
  for (int c = 0; c < 3; ++c)
    if (o[c] != 0) return o[c] > 0;
  return false;
}

}  // namespace

SweepGeometry::SweepGeometry(const VelocityGrid& grid, const SpeciesSet& species,
                             const KernelSet& kernels, const SphereQuadrature& squad)
    : grid_(grid), species_(species) {
  require(squad.dim == grid.dim(), "sphere quadrature dimension does not match the grid");
  require(kernels.species_count() == species.size(), "kernel set does not match the species");
  const int d = grid.dim();
  const int n = grid.points();
  const double h = grid.spacing();
  const int shift = 3 - d;

  for (Eigen::Index q = 0; q < squad.size(); ++q) {
    NodeInfo node;
    node.local = squad.nodes.col(q);
    node.weight = squad.weights(q);
    node.theta = std::acos(std::clamp(node.local(0), -1.0, 1.0));
    nodes_.push_back(node);
  }

  std::array<int, 3> lim{0, 0, 0};
  for (int c = 0; c < d; ++c) lim[shift + c] = n - 1;
  for (int o0 = -lim[0]; o0 <= lim[0]; ++o0)
    for (int o1 = -lim[1]; o1 <= lim[1]; ++o1)
      for (int o2 = -lim[2]; o2 <= lim[2]; ++o2) {
        if (o0 == 0 && o1 == 0 && o2 == 0) continue;
        OffsetInfo off;
        off.o = {o0, o1, o2};
        off.g = Velocity(d);
        for (int c = 0; c < d; ++c) off.g(c) = h * off.o[shift + c];
        off.r = off.g.norm();
        off.frame = collision_frame(off.g / off.r);
        off.count = 1;
        for (int ax = 0; ax < 3; ++ax) {
          const int dim_ax = (ax < shift) ? 1 : n;
          const int oa = off.o[ax];
          off.lo_a[ax] = std::max(0, oa);
          off.extent[ax] = std::min(dim_ax, dim_ax + oa) - off.lo_a[ax];
          off.lo_b[ax] = off.lo_a[ax] - oa;
          off.count *= off.extent[ax];
        }
        offsets_.push_back(off);
      }

  const int N = species.size();
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      PairPlan plan;
      plan.i = i;
      plan.j = j;
      const PairKernel& kern = kernels(i, j);
      for (std::size_t q = 0; q < nodes_.size(); ++q) {
        const double b = kern.angular(nodes_[q].theta);
        require(b >= 0, "angular kernel must be nonnegative");
        if (b > 0) {
          plan.nodes.push_back(static_cast<int>(q));
          plan.angular_weight.push_back(b * nodes_[q].weight);
        }
      }
      for (std::size_t k = 0; k < offsets_.size(); ++k) {
        // equal species: (a, b, omega) and (b, a, -omega) are one collision
        if (i == j && !positive_half(offsets_[k].o)) continue;
        const double rad = kern.radial(offsets_[k].r);
        require(rad >= 0, "radial kernel must be nonnegative");
        if (rad == 0) continue;
        plan.offsets.push_back(static_cast<int>(k));
        plan.radial.push_back(rad);
      }
      pairs_.push_back(std::move(plan));
    }
}

namespace {

// outputs of both maps that land inside the box form one interval
void valid_range(const AxisMap& a, const AxisMap& b, int& lo, int& hi) {
  lo = 0;
  hi = a.count;
  while (lo < hi && (a.base[lo] < 0 || b.base[lo] < 0)) ++lo;
  while (hi > lo && (a.base[hi - 1] < 0 || b.base[hi - 1] < 0)) --hi;
}

void mask_outside(double* rect, const std::array<int, 3>& extent, const std::array<int, 3>& lo,
                  const std::array<int, 3>& hi) {
  for (int i0 = 0; i0 < extent[0]; ++i0)
    for (int i1 = 0; i1 < extent[1]; ++i1) {
      double* row = rect + (static_cast<long>(i0) * extent[1] + i1) * extent[2];
      if (i0 < lo[0] || i0 >= hi[0] || i1 < lo[1] || i1 >= hi[1]) {
        std::fill(row, row + extent[2], 0.0);
        continue;
      }
      std::fill(row, row + lo[2], 0.0);
      std::fill(row + hi[2], row + extent[2], 0.0);
    }
}

struct Chunk {
  int plan;
  int begin, end;
};

constexpr int kChunksPerPlan = 16;

}  // namespace

double run_sweep(const SweepGeometry& geo, const std::vector<SweepSource>& sources,
                 const SweepOptions& options, SweepTask& task, Eigen::MatrixXd* field_out) {
  const VelocityGrid& grid = geo.grid();
  const SpeciesSet& species = geo.species();
  const int d = grid.dim();
  const int shift = 3 - d;
  const double h = grid.spacing();
  const double hd = grid.cell_volume();
  const int N = species.size();
  const Eigen::Index size = grid.size();
  const bool deposit = options.mode != DepositMode::none;
  require(!deposit || field_out != nullptr, "run_sweep: deposit requested without output");
  for (const auto& s : sources)
    require(s.values && s.values->rows() == size && s.values->cols() == N,
            "run_sweep: source has the wrong shape");

  std::vector<Chunk> chunks;
  for (std::size_t p = 0; p < geo.pairs().size(); ++p) {
    if (options.only_plan >= 0 && static_cast<int>(p) != options.only_plan) continue;
    const int count = static_cast<int>(geo.pairs()[p].offsets.size());
    const int pieces = std::max(1, std::min(kChunksPerPlan, count));
    for (int c = 0; c < pieces; ++c)
      chunks.push_back({static_cast<int>(p), count * c / pieces, count * (c + 1) / pieces});
  }

  std::vector<double> partial(chunks.size(), 0.0);
  std::vector<Eigen::MatrixXd> buffers(deposit ? chunks.size() : 0);
  const int ns = static_cast<int>(sources.size());

  parallel_chunks(static_cast<int>(chunks.size()), [&](int ci) {
    const Chunk& chunk = chunks[ci];
    const PairPlan& plan = geo.pairs()[chunk.plan];
    const int i = plan.i, j = plan.j;
    const double mi = species.mass(i), mj = species.mass(j);
    const double ca = mj / (mi + mj), cb = mi / (mi + mj);
    const double upper_i = species.alpha(i) == -1 ? 1.0 : HUGE_VAL;
    const double upper_j = species.alpha(j) == -1 ? 1.0 : HUGE_VAL;
    const bool first_only = options.first_particle_only && i != j;

    Eigen::MatrixXd* out = nullptr;
    if (deposit) {
      buffers[ci] = Eigen::MatrixXd::Zero(size, N);
      out = &buffers[ci];
    }
    Shifter shifter(grid);
    std::vector<std::vector<double>> ua(ns), ub(ns), sa(ns), sb(ns), ma(ns), mb(ns);
    for (int s = 0; s < ns; ++s) {
      ua[s].resize(size);
      ub[s].resize(size);
      sa[s].resize(size);
      sb[s].resize(size);
      ma[s].resize(size);
      mb[s].resize(size);
    }
    std::vector<double> x(size);
    std::array<AxisMap, 3> maps_a, maps_b;
    for (int ax = 0; ax < shift; ++ax) {
      identity_map(maps_a[ax]);
      identity_map(maps_b[ax]);
    }
    BlockData data;
    data.i = i;
    data.j = j;
    data.a.resize(ns);
    data.b.resize(ns);
    data.ap.resize(ns);
    data.bp.resize(ns);
    for (int s = 0; s < ns; ++s) {
      data.a[s] = ua[s].data();
      data.b[s] = ub[s].data();
      data.ap[s] = sa[s].data();
      data.bp[s] = sb[s].data();
    }
    Velocity omega(d), da(d), db(d);
    double acc = 0.0;

    for (int t = chunk.begin; t < chunk.end; ++t) {
      const OffsetInfo& off = geo.offsets()[plan.offsets[t]];
      const double radial = plan.radial[t];
      const int count = off.count;
      data.count = count;
      for (int s = 0; s < ns; ++s) {
        copy_rect(grid, sources[s].values->col(i).data(), off.lo_a, off.extent, ua[s].data());
        copy_rect(grid, sources[s].values->col(j).data(), off.lo_b, off.extent, ub[s].data());
      }
      for (std::size_t qi = 0; qi < plan.nodes.size(); ++qi) {
        const NodeInfo& node = geo.nodes()[plan.nodes[qi]];
        omega.noalias() = off.frame * node.local;
        da = ca * (off.r * omega - off.g);
        db = cb * (off.g - off.r * omega);
        for (int c = 0; c < d; ++c) {
          const int ax = shift + c;
          build_axis_map(grid, off.lo_a[ax], off.extent[ax], da(c), maps_a[ax]);
          build_axis_map(grid, off.lo_b[ax], off.extent[ax], db(c), maps_b[ax]);
        }
        // samples whose post-collision velocities leave the box are dropped:
        // every source is zeroed there, which makes each task contribute nothing
        std::array<int, 3> vlo{0, 0, 0}, vhi{1, 1, 1};
        bool partial_rect = false;
        for (int ax = shift; ax < 3; ++ax) {
          valid_range(maps_a[ax], maps_b[ax], vlo[ax], vhi[ax]);
          partial_rect |= vlo[ax] > 0 || vhi[ax] < off.extent[ax];
        }
        for (int s = 0; s < ns; ++s) {
          shifter.gather(sources[s].values->col(i).data(), maps_a, sa[s].data());
          shifter.gather(sources[s].values->col(j).data(), maps_b, sb[s].data());
          if (sources[s].clamp) {
            for (int e = 0; e < count; ++e) {
              sa[s][e] = std::clamp(sa[s][e], 0.0, upper_i);
              sb[s][e] = std::clamp(sb[s][e], 0.0, upper_j);
            }
          }
          if (partial_rect) {
            std::copy(ua[s].begin(), ua[s].begin() + count, ma[s].begin());
            std::copy(ub[s].begin(), ub[s].begin() + count, mb[s].begin());
            for (double* p : {ma[s].data(), mb[s].data(), sa[s].data(), sb[s].data()})
              mask_outside(p, off.extent, vlo, vhi);
          }
          data.a[s] = partial_rect ? ma[s].data() : ua[s].data();
          data.b[s] = partial_rect ? mb[s].data() : ub[s].data();
        }
        data.measure = hd * hd * radial * plan.angular_weight[qi];
        acc += task.block(data, x.data());
        if (!deposit) continue;
        add_rect(grid, x.data(), off.lo_a, off.extent, out->col(i).data());
        if (!first_only) add_rect(grid, x.data(), off.lo_b, off.extent, out->col(j).data());
        if (options.mode == DepositMode::adjoint) {
          shifter.scatter_sub(x.data(), maps_a, out->col(i).data());
          if (!first_only) shifter.scatter_sub(x.data(), maps_b, out->col(j).data());
        }
      }
    }
    partial[ci] = acc;
  });

  (void)h;
  double total = 0.0;
  for (double p : partial) total += p;
  if (deposit) {
    field_out->setZero(size, N);
    for (const auto& b : buffers) *field_out += b;
  }
  return total;
}

}  // namespace kgen::detail
