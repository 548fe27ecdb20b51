#pragma once

// Converged-solution records shared by the solver and the independent
// verifier. The physical potential is phi = Phi(u) + chi; theta is its
// distributional Laplacian, carried so persisted records can be re-verified
// without re-running any solver.

#include <cstdint>

#include "sbp/grid.hpp"

namespace sbp {

struct SolutionRecord {
  ScalarField u;           // interior, homogeneous trace
  ScalarField phi_full;    // full lattice, trace h1
  ScalarField theta_full;  // full lattice, trace h2
  double omega = 0.0;
  double J_value = 0.0;
  double dual_norm = 0.0;   // measured on the undeflated functional
  double path_energy = 0.0; // maximal path value at the end of the descent
  double u_l2 = 0.0;
  long iterations = 0;
  int deflation_index = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  bool nontrivial = false;
};

}  // namespace sbp
