#include "kgen/species_kernel.hpp"

#include "kgen/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kgen {

Statistics statistics_from_alpha(int alpha) {
  switch (alpha) {
    case -1:
      return Statistics::fermi;
    case 0:
      return Statistics::maxwell;
    case 1:
      return Statistics::bose;
  }
  throw PreconditionError("statistics flag must be -1, 0 or +1, got " + std::to_string(alpha));
}

std::string to_string(Statistics s) {
  switch (s) {
    case Statistics::fermi:
      return "fermi";
    case Statistics::maxwell:
      return "maxwell";
    case Statistics::bose:
      return "bose";
  }
  return "?";
}

SpeciesSet::SpeciesSet(std::vector<double> masses, std::vector<Statistics> statistics)
    : masses_(std::move(masses)), stats_(std::move(statistics)) {
  require(!masses_.empty(), "species set needs at least one species");
  require(masses_.size() == stats_.size(), "species set: masses and statistics differ in length");
  for (double m : masses_) require(m > 0 && std::isfinite(m), "species masses must be positive");
  for (Statistics s : stats_) {
    const int a = static_cast<int>(s);
    require(a >= -1 && a <= 1, "species statistics must be -1, 0 or +1");
  }
}

RadialFactor maxwell_radial(double c) {
  require(c >= 0, "maxwell radial constant must be nonnegative");
  return {RadialKind::maxwell, [c](double) { return c; }, [](double) { return 0.0; },
          "maxwell(" + std::to_string(c) + ")"};
}

RadialFactor power_law_radial(double c, double gamma) {
  require(c >= 0, "power-law constant must be nonnegative");
  return {RadialKind::power_law, [c, gamma](double r) { return c * std::pow(r, gamma); },
          [c, gamma](double r) { return gamma == 0 ? 0.0 : c * gamma * std::pow(r, gamma - 1); },
          "power-law(" + std::to_string(c) + ", " + std::to_string(gamma) + ")"};
}

RadialFactor exponential_radial(double c, double rate) {
  require(c >= 0, "exponential constant must be nonnegative");
  return {RadialKind::exponential, [c, rate](double r) { return c * std::exp(rate * r); },
          [c, rate](double r) { return c * rate * std::exp(rate * r); },
          "exponential(" + std::to_string(c) + ", " + std::to_string(rate) + ")"};
}

RadialFactor tabulated_radial(std::vector<std::pair<double, double>> table) {
  require(table.size() >= 2, "tabulated radial kernel needs at least two rows");
  std::sort(table.begin(), table.end());
  for (std::size_t k = 0; k < table.size(); ++k) {
    require(table[k].second >= 0, "tabulated radial kernel values must be nonnegative");
    if (k > 0) require(table[k].first > table[k - 1].first, "tabulated radial kernel: repeated r");
  }
  auto value = [table](double r) {
    if (r <= table.front().first) return table.front().second;
    if (r >= table.back().first) return table.back().second;
    auto it = std::upper_bound(table.begin(), table.end(), std::make_pair(r, -HUGE_VAL));
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (r - lo.first) / (hi.first - lo.first);
    return (1 - t) * lo.second + t * hi.second;
  };
  return {RadialKind::tabulated, value, {}, "tabulated(" + std::to_string(table.size()) + " rows)"};
}

RadialFactor tabulated_radial_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open radial table " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double r, a;
    if (!(ls >> r)) continue;
    if (!(ls >> a))
      throw PreconditionError(path + ":" + std::to_string(lineno) + ": expected two columns");
    rows.emplace_back(r, a);
  }
  return tabulated_radial(std::move(rows));
}

AngularFactor constant_angular(double c) {
  require(c >= 0, "angular constant must be nonnegative");
  return {[c](double t) { return t <= pi / 2 ? c : 0.0; }, "constant(" + std::to_string(c) + ")"};
}

AngularFactor cosine_angular(double c) {
  require(c >= 0, "angular constant must be nonnegative");
  return {[c](double t) { return t <= pi / 2 ? c * std::cos(t) : 0.0; }, "cosine(" + std::to_string(c) + ")"};
}

AngularFactor zero_angular() {
  return {[](double) { return 0.0; }, "zero"};
}

PairKernel::PairKernel(RadialFactor radial, AngularFactor angular)
    : radial_(std::move(radial)), angular_(std::move(angular)) {
  require(static_cast<bool>(radial_.value), "pair kernel needs a radial factor");
  require(static_cast<bool>(angular_.value), "pair kernel needs an angular factor");
  // probe the excluded half-range once
  for (int k = 1; k <= 8; ++k) {
    const double theta = pi / 2 + k * (pi / 2) / 8.0;
    if (angular_.value(theta) != 0.0) {
      warn("angular kernel " + angular_.description +
           " is nonzero beyond pi/2; it is treated as zero there");
      break;
    }
  }
}

double PairKernel::radial(double r) const {
  require(r >= 0, "radial kernel: negative relative speed");
  return radial_.value(r);
}

double PairKernel::radial_derivative(double r) const {
  if (radial_.derivative) return radial_.derivative(r);
  const double step = 1e-6 * std::max(r, 1.0);
  const double lo = std::max(0.0, r - step);
  return (radial_.value(r + step) - radial_.value(lo)) / (r + step - lo);
}

double PairKernel::angular(double theta) const {
  if (theta < 0 || theta > pi / 2) return 0.0;
  return angular_.value(theta);
}

std::string PairKernel::describe() const {
  return radial_.description + " x " + angular_.description;
}

KernelSet::KernelSet(int species_count, const PairKernel& all_pairs) : KernelSet(species_count) {
  for (auto& p : pairs_) p = all_pairs;
}

KernelSet::KernelSet(int species_count) : n_(species_count) {
  require(species_count >= 1, "kernel set needs at least one species");
  pairs_.resize(static_cast<std::size_t>(n_) * (n_ + 1) / 2);
}

int KernelSet::slot(int i, int j) const {
  require(i >= 0 && j >= 0 && i < n_ && j < n_, "kernel set: species index out of range");
  if (i > j) std::swap(i, j);
  return i * n_ - i * (i - 1) / 2 + (j - i);
}

void KernelSet::set(int i, int j, PairKernel kernel) { pairs_[slot(i, j)] = std::move(kernel); }

const PairKernel& KernelSet::operator()(int i, int j) const {
  const auto& p = pairs_[slot(i, j)];
  if (!p) throw PreconditionError("kernel set: no kernel for pair (" + std::to_string(i + 1) + "," +
                                  std::to_string(j + 1) + ")");
  return *p;
}

double kernel_B(const PairKernel& pair, double r, double theta) {
  require(r >= 0, "kernel_B: negative relative speed");
  const double b = pair.angular(theta);
  return b == 0.0 ? 0.0 : pair.radial(r) * b;
}

double kernel_A(const PairKernel& pair, double r, double mi) {
  require(r >= 0, "kernel_A: negative relative speed");
  require(mi > 0, "kernel_A: mass must be positive");
  return r * r * pair.radial(r) / mi;
}

double sphere_area(int k) {
  require(k >= 0, "sphere_area: negative dimension");
  // |S^k| = 2 pi^{(k+1)/2} / Gamma((k+1)/2)
  return 2.0 * std::pow(pi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

GrazingFamily::GrazingFamily(ScalarFunction base, int dim, const SpeciesSet& species)
    : base_(std::move(base)), dim_(dim), species_(species) {
  require(dim == 2 || dim == 3, "grazing family dimension must be 2 or 3");
  require(static_cast<bool>(base_), "grazing family needs a base density");
  base_moment_ = integrate([this](double t) { return t * t * base_(t); }, 0.0, pi / 2, 128, 12);
  require(base_moment_ > 0, "grazing family base density has zero second moment");
  const int N = species.size();
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) scale_.push_back(target_moment(i, j) / base_moment_);
}

double GrazingFamily::target_moment(int i, int j) const {
  const double mi = species_.mass(i), mj = species_.mass(j);
  const double M = mi + mj;
  return 2.0 * (dim_ - 1) / sphere_area(dim_ - 2) * M * M / (mi * mi * mj * mj);
}

double GrazingFamily::beta(int i, int j, double theta) const {
  if (theta < 0 || theta > pi / 2) return 0.0;
  if (i > j) std::swap(i, j);
  const int N = species_.size();
  return scale_[i * N - i * (i - 1) / 2 + (j - i)] * base_(theta);
}

double GrazingFamily::scaled_beta(int i, int j, double eps, double theta) const {
  require(eps > 0 && eps < 1, "grazing scale must lie in (0,1)");
  if (theta < 0 || theta > eps / 2) return 0.0;
  const double s = pi / eps;
  return s * s * s * beta(i, j, s * theta);
}

double GrazingFamily::scaled_b(int i, int j, double eps, double theta) const {
  const double v = scaled_beta(i, j, eps, theta);
  if (v == 0.0 || dim_ == 2) return v;
  return v / std::pow(std::sin(theta), dim_ - 2);
}

double GrazingFamily::second_moment(int i, int j, double eps) const {
  if (eps == 1.0)
    return integrate([&](double t) { return t * t * beta(i, j, t); }, 0.0, pi / 2, 128, 12);
  return integrate([&](double t) { return t * t * scaled_beta(i, j, eps, t); }, 0.0, eps / 2, 128,
                   12);
}

KernelSet GrazingFamily::scaled_kernels(double eps, const RadialFactor& radial) const {
  require(eps > 0 && eps < 1, "grazing scale must lie in (0,1)");
  const int N = species_.size();
  KernelSet ks(N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      // captured by value: the kernel set may outlive the family
      const double sc = scale_[i * N - i * (i - 1) / 2 + (j - i)];
      AngularFactor ang{[base = base_, sc, eps, d = dim_](double t) {
                          if (t < 0 || t > eps / 2) return 0.0;
                          const double s = pi / eps;
                          const double v = s * s * s * sc * base(s * t);
                          return d == 2 ? v : v / std::sin(t);
                        },
                        "grazing(eps=" + std::to_string(eps) + ")"};
      ks.set(i, j, PairKernel(radial, ang));
    }
  return ks;
}

double scaled_angular(const GrazingFamily& fam, int i, int j, double eps, double theta) {
  return fam.scaled_beta(i, j, eps, theta);
}

AssumptionReport assumption_check(const PairKernel& pair, double lambda_b,
                                  const std::vector<double>& r_samples) {
  require(lambda_b > 0, "assumption_check: Lambda_b must be positive");
  AssumptionReport rep;
  rep.threshold = 2.0 * std::sqrt(lambda_b);
  for (double r : r_samples) {
    require(r >= 0, "assumption_check: negative sample radius");
    const double a = pair.radial(r);
    if (!(a > 0)) {
      ++rep.indeterminate;
      warn("assumption_check: alpha vanishes at r = " + std::to_string(r) + "; sample skipped");
      continue;
    }
    rep.worst_ratio = std::max(rep.worst_ratio, r * std::abs(pair.radial_derivative(r)) / a);
  }
  rep.holds = rep.worst_ratio <= rep.threshold;
  return rep;
}

}  // namespace kgen
