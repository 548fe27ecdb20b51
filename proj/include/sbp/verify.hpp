#pragma once

// Independent certification of solution records: full-system residuals from
// fresh stencil applications, the maximum-principle check, and the
// nonexistence threshold for the unperturbed problem. Deliberately depends
// only on the grid, the elliptic stencils/solves and the closed-form
// nonlinearity; never on the solver modules it audits.

#include <cmath>
#include <string>

#include "sbp/elliptic.hpp"
#include "sbp/grid.hpp"
#include "sbp/nonlinearity.hpp"
#include "sbp/records.hpp"

namespace sbp {

struct ResidualTolerances {
  double schrodinger_dual = 1e-5;  // H^{-1}-style dual norm
  double field_rel = 1e-6;         // relative L2, split through theta
  double bc_abs = 1e-10;           // nodewise trace mismatch
};

struct ResidualReport {
  double schrodinger_residual = 0.0;
  double field_residual = 0.0;
  double bc_residual = 0.0;
  double field_theta_equation = 0.0;  // ||(-D+I)theta + 4 pi u^2|| / ||4 pi u^2||
  double field_phi_equation = 0.0;    // ||Delta phi - theta|| / ||theta||
  bool pass = false;
  ResidualTolerances tolerances;
};

inline ResidualReport system_residual(const SolutionRecord& rec, const BoundaryData& h1,
                                      const BoundaryData& h2, const NonlinearitySpec& spec,
                                      const ResidualTolerances& tol = {},
                                      const SolveOptions& lin = {1e-12, 1e-14, 100000}) {
  const GridDomain& g = rec.u.grid();
  require_same_grid(g, rec.phi_full.grid(), "system_residual");
  require_same_grid(g, rec.theta_full.grid(), "system_residual");
  require_same_grid(g, h1.grid(), "system_residual");
  if (rec.u.node_set() != NodeSet::interior || rec.phi_full.node_set() != NodeSet::full ||
      rec.theta_full.node_set() != NodeSet::full)
    throw std::invalid_argument("system_residual: unexpected node sets");

  ResidualReport rep;
  rep.tolerances = tol;
  EllipticOperator lap(g, OperatorKind::neg_laplacian);
  EllipticOperator helm(g, OperatorKind::helmholtz);

  // Schrodinger equation: rho = -1/2 Delta u + (phi - omega) u - g(x, u),
  // reported in the dual norm sqrt(<rho, (-Delta)^{-1} rho>).
  ScalarField rho = apply(lap, rec.u);
  for (index_t i = 0; i < rho.size(); ++i) {
    const double phi_i = rec.phi_full[g.interior_to_full(i)];
    rho[i] = 0.5 * rho[i] + (phi_i - rec.omega) * rec.u[i] - eval_g(spec, i, rec.u[i]);
  }
  ScalarField riesz = solve_dirichlet(lap, rho, BoundaryData(g), lin);
  rep.schrodinger_residual = std::sqrt(std::max(0.0, dot_l2(rho, riesz)));

  // Field equation through the theta splitting.
  ScalarField source = rec.u;
  for (double& v : source.values()) v = 4.0 * M_PI * v * v;
  ScalarField theta_int = interior_part(rec.theta_full);
  const double theta_norm = norm(theta_int, NormKind::L2);
  ScalarField r_theta = added(apply(helm, rec.theta_full), source);
  const double source_scale = std::max({norm(source, NormKind::L2), theta_norm, 1e-30});
  rep.field_theta_equation = norm(r_theta, NormKind::L2) / source_scale;

  ScalarField r_phi = added(apply(lap, rec.phi_full), theta_int);  // Delta phi - theta
  const double theta_scale = std::max(theta_norm, source_scale);
  rep.field_phi_equation = norm(r_phi, NormKind::L2) / theta_scale;
  rep.field_residual = std::max(rep.field_theta_equation, rep.field_phi_equation);

  // Trace mismatches: u is structurally zero on the boundary; phi and theta
  // carry their stored traces.
  double bc = 0.0;
  for (index_t b = 0; b < g.boundary_count(); ++b) {
    const index_t f = g.boundary_to_full(b);
    bc = std::max(bc, std::abs(rec.phi_full[f] - h1[b]));
    bc = std::max(bc, std::abs(rec.theta_full[f] - h2[b]));
  }
  rep.bc_residual = bc;

  rep.pass = rep.schrodinger_residual <= tol.schrodinger_dual &&
             rep.field_residual <= tol.field_rel && rep.bc_residual <= tol.bc_abs;
  return rep;
}

// ---- maximum principle ----------------------------------------------------

enum class MaxPrincipleVerdict {
  positive,        // phi > 0 at every interior node (within roundoff slack)
  degenerate_zero, // all data vanish; phi = 0, strict positivity not asserted
  hypothesis_gap,  // h1 - h2 >= 0 holds but h1 >= 0 does not; no assertion made
  inapplicable,    // h1 - h2 < 0 somewhere or a negative source
  violated
};

struct MaxPrincipleReport {
  MaxPrincipleVerdict verdict = MaxPrincipleVerdict::violated;
  double min_value = 0.0;
  index_t min_node = -1;  // interior index of the minimizing node
};

inline MaxPrincipleReport check_max_principle(const ScalarField& phi_full,
                                              const BoundaryData& h1, const BoundaryData& h2,
                                              const ScalarField& u_rhs,
                                              double slack = 1e-12) {
  const GridDomain& g = phi_full.grid();
  require_same_grid(g, h1.grid(), "check_max_principle");
  require_same_grid(g, u_rhs.grid(), "check_max_principle");
  MaxPrincipleReport rep;

  for (index_t b = 0; b < g.boundary_count(); ++b)
    if (h1[b] - h2[b] < 0.0) {
      rep.verdict = MaxPrincipleVerdict::inapplicable;
      return rep;
    }

  double min_phi = std::numeric_limits<double>::infinity();
  for (index_t i = 0; i < g.interior_count(); ++i) {
    const double v = phi_full[g.interior_to_full(i)];
    if (v < min_phi) {
      min_phi = v;
      rep.min_node = i;
    }
  }
  rep.min_value = min_phi;

  const bool zero_data = h1.max_abs() < 1e-14 && h2.max_abs() < 1e-14 &&
                         norm(u_rhs, NormKind::Linf) < 1e-14;
  if (zero_data) {
    rep.verdict = std::abs(min_phi) <= slack ? MaxPrincipleVerdict::degenerate_zero
                                             : MaxPrincipleVerdict::violated;
    return rep;
  }
  bool h1_nonneg = true;
  for (index_t b = 0; b < g.boundary_count(); ++b)
    if (h1[b] < 0.0) h1_nonneg = false;
  if (!h1_nonneg) {
    rep.verdict = MaxPrincipleVerdict::hypothesis_gap;
    return rep;
  }
  rep.verdict = min_phi > -slack ? MaxPrincipleVerdict::positive : MaxPrincipleVerdict::violated;
  return rep;
}

// ---- nonexistence threshold ------------------------------------------------

enum class NonexistenceVerdict { consistent, contradiction, inapplicable };

struct NonexistenceReport {
  NonexistenceVerdict verdict = NonexistenceVerdict::inapplicable;
  double rayleigh_lhs = 0.0;  // omega * integral u^2
  double rayleigh_rhs = 0.0;  // 1/2 integral |grad u|^2
  std::string detail;
};

// For the unperturbed problem (g = 0, h1 - h2 >= 0): a nontrivial converged
// record must satisfy omega |u|_2^2 > 1/2 ||u||^2, which forces
// omega > lambda_1 / 2. A nontrivial record at or below that threshold is a
// contradiction with the nonexistence result.
inline NonexistenceReport check_nonexistence(const SolutionRecord& rec,
                                             const NonlinearitySpec& spec, double lambda1,
                                             const BoundaryData& h1, const BoundaryData& h2) {
  NonexistenceReport rep;
  if (!spec.is_zero()) {
    rep.detail = "nonlinearity is not the zero family";
    return rep;
  }
  for (index_t b = 0; b < h1.size(); ++b)
    if (h1[b] - h2[b] < 0.0) {
      rep.detail = "h1 - h2 < 0 somewhere on the boundary";
      return rep;
    }
  if (!rec.nontrivial || !rec.converged) {
    rep.verdict = NonexistenceVerdict::consistent;
    rep.detail = "only the trivial record";
    return rep;
  }
  rep.rayleigh_lhs = rec.omega * dot_l2(rec.u, rec.u);
  rep.rayleigh_rhs = 0.5 * detail::dirichlet_form(rec.u);
  const bool below_threshold = rec.omega <= 0.5 * lambda1;
  const bool rayleigh_ok = rep.rayleigh_lhs > rep.rayleigh_rhs;
  if (below_threshold || !rayleigh_ok) {
    rep.verdict = NonexistenceVerdict::contradiction;
    rep.detail = below_threshold
                     ? "nontrivial converged record with omega <= lambda_1 / 2"
                     : "record violates the Rayleigh inequality of genuine solutions";
  } else {
    rep.verdict = NonexistenceVerdict::consistent;
  }
  return rep;
}

}  // namespace sbp
