#pragma once

// Block-structured evaluation of the discrete collision sums.
//
// Samples (v_a, v_b, omega) are grouped by the lattice offset o = (v_a - v_b)/h
// and the angular node q. Inside one group the post-collision displacement is
// the same for every v_a, so primed values on the whole overlap rectangle come
// from one separable four-point shift, and the scatter back to the stencils is
// its exact transpose.

#include "kgen/species_kernel.hpp"
#include "kgen/velocity_grid.hpp"

#include <array>
#include <vector>

namespace kgen::detail {

struct AxisMap {
  int out_lo = 0;
  int count = 0;
  int src_lo = 0;
  int src_count = 0;
  bool identity = false;  // unused leading axis in 2D
  std::vector<int> base;  // relative to src_lo, -1 when outside the box
  std::vector<std::array<double, 4>> w;
  // outputs c in [fast_lo, fast_hi) use weights w_fast and base c + fast_base
  int fast_lo = 0, fast_hi = 0, fast_base = 0;
  std::array<double, 4> w_fast{};
};

void build_axis_map(const VelocityGrid& grid, int out_lo, int count, double shift, AxisMap& map);

// Fields are addressed as 3-axis arrays; in 2D the leading axis has extent 1
// and an identity map.
class Shifter {
 public:
  explicit Shifter(const VelocityGrid& grid);

  // out (rect-shaped, contiguous) = field sampled at node + shift.
  void gather(const double* field, const std::array<AxisMap, 3>& maps, double* out);
  // field -= transpose(gather) applied to rect-shaped x.
  void scatter_sub(const double* x, const std::array<AxisMap, 3>& maps, double* field);

 private:
  std::array<int, 3> dims_;
  std::vector<double> buf_a_, buf_b_;
};

struct OffsetInfo {
  std::array<int, 3> o{0, 0, 0};  // 3-axis layout
  double r = 0;
  Velocity g;      // v_a - v_b
  Tensor frame;    // d x d, column 0 = g/|g|
  std::array<int, 3> lo_a{}, lo_b{}, extent{};
  int count = 0;
};

struct NodeInfo {
  Velocity local;  // pole = component 0
  double weight = 0;
  double theta = 0;
};

struct PairPlan {
  int i = 0, j = 0;
  std::vector<int> offsets;            // indices into SweepGeometry::offsets
  std::vector<double> radial;          // alpha_ij(r) per listed offset
  std::vector<int> nodes;              // active angular nodes
  std::vector<double> angular_weight;  // w_q * b_ij(theta_q)
};

class SweepGeometry {
 public:
  SweepGeometry(const VelocityGrid& grid, const SpeciesSet& species, const KernelSet& kernels,
                const SphereQuadrature& squad);

  const VelocityGrid& grid() const { return grid_; }
  const SpeciesSet& species() const { return species_; }
  const std::vector<OffsetInfo>& offsets() const { return offsets_; }
  const std::vector<NodeInfo>& nodes() const { return nodes_; }
  const std::vector<PairPlan>& pairs() const { return pairs_; }
  int species_count() const { return species_.size(); }

 private:
  VelocityGrid grid_;
  SpeciesSet species_;
  std::vector<OffsetInfo> offsets_;
  std::vector<NodeInfo> nodes_;
  std::vector<PairPlan> pairs_;
};

// One field family fed to a task: the same grid function for every species
// (e.g. F itself, or a test function Phi).
struct SweepSource {
  const Eigen::MatrixXd* values = nullptr;  // size x N
  bool clamp = false;                       // clamp shifted values to [0, upper_s]
};

struct BlockData {
  int count = 0;
  double measure = 0;  // h^{2d} * w_q * B, the integration weight of one sample
  int i = 0, j = 0;
  // per source: unshifted and shifted values of particle a (species i) and b (species j)
  std::vector<const double*> a, b, ap, bp;
};

// Rect copy and add between a full grid array and a contiguous rect buffer.
void copy_rect(const VelocityGrid& grid, const double* field, const std::array<int, 3>& lo,
               const std::array<int, 3>& extent, double* rect);
void add_rect(const VelocityGrid& grid, const double* rect, const std::array<int, 3>& lo,
              const std::array<int, 3>& extent, double* field);

enum class DepositMode { none, gather, adjoint };

class SweepTask {
 public:
  virtual ~SweepTask() = default;
  // Returns a scalar contribution; in deposit modes also fills x (count entries)
  // with the amount deposited at both particles of every sample.
  virtual double block(const BlockData& data, double* x) const = 0;
};

struct SweepOptions {
  DepositMode mode = DepositMode::none;
  int only_plan = -1;            // restrict to one species pair
  bool first_particle_only = false;  // deposit into species i of the pair only
};

// Returns the scalar total; field_out (size x N) receives deposits when requested.
double run_sweep(const SweepGeometry& geo, const std::vector<SweepSource>& sources,
                 const SweepOptions& options, SweepTask& task, Eigen::MatrixXd* field_out);

}  // namespace kgen::detail
