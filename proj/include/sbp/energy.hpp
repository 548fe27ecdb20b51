#pragma once

// The two-variable functional F_omega, the reduced functional
// J_omega(u) = F_omega(u, Phi(u)), its derivative as an L2 density, and the
// Riesz representative of that derivative in the H01 metric (the Sobolev
// gradient used for descent).

#include <cmath>
#include <optional>

#include "sbp/elliptic.hpp"
#include "sbp/grid.hpp"
#include "sbp/lift.hpp"
#include "sbp/nonlinearity.hpp"
#include "sbp/reduction.hpp"

namespace sbp {

struct ProblemConfig {
  GridDomain grid;
  double omega = 0.0;
  BoundaryLift lift;
  NonlinearitySpec spec;
  ScalarField chi_interior;  // cached interior restriction of lift.chi

  SolveOptions lin{1e-12, 1e-14, 100000};  // linear solves behind J and Phi
  double dual_tol = 1e-6;
  double trivial_tol = 1e-6;
  double chi_safety = 1.05;
};

inline ProblemConfig make_problem_config(GridDomain grid, double omega, BoundaryLift lift,
                                         NonlinearitySpec spec) {
  ProblemConfig c;
  c.grid = std::move(grid);
  require_same_grid(c.grid, lift.chi.grid(), "make_problem_config");
  c.omega = omega;
  c.lift = std::move(lift);
  c.spec = std::move(spec);
  c.chi_interior = lift_interior(c.lift);
  return c;
}

inline double integral_G(const ScalarField& u, const NonlinearitySpec& spec) {
  if (spec.is_zero()) return 0.0;
  const GridDomain& g = u.grid();
  double s = 0.0;
  for (index_t i = 0; i < u.size(); ++i) s += eval_G(spec, i, u[i]);
  return s * g.cell_volume();
}

// F_omega(u, phi) for a homogeneous-trace pair; chi and omega come from the
// config. The phi terms carry the negative sign of the unreduced functional.
inline double eval_F(const ScalarField& u, const ScalarField& phi, const ProblemConfig& cfg) {
  require_same_grid(u.grid(), cfg.grid, "eval_F");
  require_same_grid(phi.grid(), cfg.grid, "eval_F");
  if (u.node_set() != NodeSet::interior || phi.node_set() != NodeSet::interior)
    throw std::invalid_argument("eval_F: expects homogeneous-trace fields");
  const double grad_u = detail::dirichlet_form(u);
  double coupling = 0.0;
  for (index_t i = 0; i < u.size(); ++i)
    coupling += (phi[i] + cfg.chi_interior[i] - cfg.omega) * u[i] * u[i];
  coupling *= cfg.grid.cell_volume();
  const PotentialForms f = potential_forms(phi);
  return 0.25 * grad_u + 0.5 * coupling - integral_G(u, cfg.spec) -
         (f.grad + f.lap) / (16.0 * M_PI);
}

struct JEvaluation {
  double value = 0.0;
  PhiResult phi;
};

// J_omega(u) evaluated from its displayed formula; the Phi terms flip sign
// relative to F. One fourth-order solve per call; pass `warm` to reuse the
// previous potential as the iterative starting point.
inline JEvaluation eval_J_with_phi(const ScalarField& u, const ProblemConfig& cfg,
                                   const PhiResult* warm = nullptr) {
  require_same_grid(u.grid(), cfg.grid, "eval_J");
  if (u.node_set() != NodeSet::interior)
    throw std::invalid_argument("eval_J: expects a homogeneous-trace field");
  JEvaluation out;
  out.phi = solve_phi(u, cfg.lin, warm);
  const double grad_u = detail::dirichlet_form(u);
  double coupling = 0.0;
  for (index_t i = 0; i < u.size(); ++i)
    coupling += (cfg.chi_interior[i] - cfg.omega) * u[i] * u[i];
  coupling *= cfg.grid.cell_volume();
  const PotentialForms f = potential_forms(out.phi.phi);
  out.value = 0.25 * grad_u + 0.5 * coupling - integral_G(u, cfg.spec) +
              (f.grad + f.lap) / (16.0 * M_PI);
  return out;
}

inline double eval_J(const ScalarField& u, const ProblemConfig& cfg) {
  return eval_J_with_phi(u, cfg).value;
}

struct GradientPair {
  ScalarField dual;     // L2 density of J'(u)
  ScalarField sobolev;  // Riesz representative in the H01 metric
  double dual_norm = 0.0;  // ||sobolev||_H01 = H^{-1}-style norm of dual
};

inline GradientPair grad_J(const ScalarField& u, const ProblemConfig& cfg,
                           const PhiResult* phi_pre = nullptr) {
  require_same_grid(u.grid(), cfg.grid, "grad_J");
  if (u.node_set() != NodeSet::interior)
    throw std::invalid_argument("grad_J: expects a homogeneous-trace field");
  PhiResult local;
  const PhiResult* phi = phi_pre;
  if (phi == nullptr) {
    local = solve_phi(u, cfg.lin);
    phi = &local;
  }
  EllipticOperator lap(cfg.grid, OperatorKind::neg_laplacian);
  GradientPair out;
  out.dual = apply(lap, u);
  for (index_t i = 0; i < u.size(); ++i) {
    out.dual[i] = 0.5 * out.dual[i] +
                  (phi->phi[i] + cfg.chi_interior[i] - cfg.omega) * u[i] -
                  eval_g(cfg.spec, i, u[i]);
  }
  out.sobolev = solve_dirichlet(lap, out.dual, BoundaryData(cfg.grid), cfg.lin);
  out.dual_norm = std::sqrt(std::max(0.0, dot_l2(out.dual, out.sobolev)));
  return out;
}

// Hessian action of J at u in the L2-density sense:
//   H[v] = -1/2 Delta v + (Phi(u) + chi - omega) v + psi_v u - g'(x,u) v,
// where psi_v solves the homogeneous fourth-order problem with source
// 8 pi u v. Used by the Newton polish; symmetric by construction.
inline ScalarField hessian_apply(const ScalarField& u, const PhiResult& phi_u,
                                 const ScalarField& v, const ProblemConfig& cfg) {
  EllipticOperator lap(cfg.grid, OperatorKind::neg_laplacian);
  ScalarField out = apply(lap, v);
  ScalarField src = u;
  for (index_t i = 0; i < src.size(); ++i) src[i] = 8.0 * M_PI * u[i] * v[i];
  BoundaryData zero(cfg.grid);
  auto psi = solve_fourth_order(src, zero, zero, cfg.lin);
  for (index_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * out[i] +
             (phi_u.phi[i] + cfg.chi_interior[i] - cfg.omega) * v[i] +
             psi.phi[i] * u[i] - eval_g_prime(cfg.spec, i, u[i]) * v[i];
  }
  return out;
}

}  // namespace sbp
