#pragma once

// Boundary lift: the solution chi of the homogeneous fourth-order problem
//   -Delta chi + Delta^2 chi = 0,  chi = h1,  Delta chi = h2 on the boundary,
// which homogenizes the full system, together with sup |chi| used by the
// mountain-pass geometry checks.

#include <cmath>

#include "sbp/elliptic.hpp"
#include "sbp/grid.hpp"

namespace sbp {

struct BoundaryLift {
  ScalarField chi;    // full lattice, trace h1
  ScalarField theta;  // full lattice, trace h2 (the intermediate Delta chi)
  BoundaryData h1;
  BoundaryData h2;
  double sup_norm = 0.0;  // max |chi| over interior and boundary nodes
};

inline BoundaryLift compute_chi(const BoundaryData& h1, const BoundaryData& h2,
                                const SolveOptions& opts = {}) {
  require_same_grid(h1.grid(), h2.grid(), "compute_chi");
  const GridDomain& g = h1.grid();
  ScalarField zero_rhs(g, NodeSet::interior, 0.0);
  auto sol = solve_fourth_order(zero_rhs, h1, h2, opts);
  BoundaryLift lift;
  lift.chi = with_boundary(sol.phi, h1);
  lift.theta = with_boundary(sol.theta, h2);
  lift.h1 = h1;
  lift.h2 = h2;
  lift.sup_norm = norm(lift.chi, NormKind::Linf);
  return lift;
}

// Interior restriction of chi, used by the energy integrands.
inline ScalarField lift_interior(const BoundaryLift& lift) { return interior_part(lift.chi); }

}  // namespace sbp
