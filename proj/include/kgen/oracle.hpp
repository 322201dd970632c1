#pragma once

// Brute-force reference evaluations of the discrete operators. Every sample
// (ordered species pair, ordered node pair, circle node) is visited one at a
// time with its own interpolation and derivative weights, so the results are
// independent of the block sweeps used by the production operators. d = 2 only.

#include "kgen/boltzmann.hpp"
#include "kgen/landau.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace kgen {

Eigen::MatrixXd oracle_q_boltzmann(const Mixture& F, const SpeciesSet& species,
                                   const KernelSet& kernels, const SphereQuadrature& squad);
double oracle_weak_boltzmann(const Mixture& F, const Eigen::MatrixXd& phi, const SpeciesSet& species,
                             const KernelSet& kernels, const SphereQuadrature& squad);
double oracle_dissipation_boltzmann(const Mixture& F, const SpeciesSet& species,
                                    const KernelSet& kernels, const SphereQuadrature& squad);

Eigen::MatrixXd oracle_q_landau(const Mixture& F, const SpeciesSet& species, const KernelSet& kernels);
double oracle_weak_landau(const Mixture& F, const Eigen::MatrixXd& phi, const SpeciesSet& species,
                          const KernelSet& kernels);
double oracle_dissipation_landau(const Mixture& F, const SpeciesSet& species,
                                 const KernelSet& kernels);

struct OracleTolerances {
  double oracle = 1e-9;       // optimized vs brute force, relative
  double consistency = 1e-8;  // weak form vs h^d sum Q Phi, relative
};

struct OracleCheck {
  std::string name;  // <case>.<operator>.<quantity>
  double value = 0;
  double tol = 0;
  bool pass = false;
};

struct OracleSuite {
  std::vector<OracleCheck> checks;
  bool pass = true;
};

// Fixed cases on d = 2 grids with n <= max_n, covering all three statistics.
OracleSuite run_oracle_suite(std::uint64_t seed, const OracleTolerances& tol, int max_n = 16);

void write_oracle_csv(std::ostream& os, const OracleSuite& suite);

}  // namespace kgen
