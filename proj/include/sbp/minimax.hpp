#pragma once

// Numerical counterpart of the symmetric mountain-pass machinery: the
// geometry verifier (eigenvalue splitting, k_omega, sphere positivity and
// outer negativity radii), a move-the-max path descent with Sobolev
// gradients, a Newton polish for the critical-point endgame, and deflation
// for multiple distinct solutions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sbp/elliptic.hpp"
#include "sbp/energy.hpp"
#include "sbp/grid.hpp"
#include "sbp/records.hpp"

namespace sbp {

namespace detail {

// Deterministic standard-normal stream (Box-Muller over mt19937_64).
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : gen_(seed) {}
  double operator()() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    const double u1 = unit(), u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }
  ScalarField field(const GridDomain& g) {
    ScalarField f(g, NodeSet::interior);
    for (index_t i = 0; i < f.size(); ++i) f[i] = (*this)();
    return f;
  }

 private:
  double unit() { return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0); }
  std::mt19937_64 gen_;
  bool have_ = false;
  double spare_ = 0.0;
};

struct MinresResult {
  long iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Preconditioned MINRES for a symmetric (possibly indefinite) operator with
// an SPD preconditioner; Paige-Saunders recurrences.
template <typename ApplyA, typename ApplyM>
MinresResult pminres(ApplyA&& Aop, ApplyM&& Mop, const std::vector<double>& b,
                     std::vector<double>& x, double rtol, long maxit) {
  const std::size_t n = b.size();
  x.assign(n, 0.0);
  std::vector<double> r1 = b, r2 = b, y(n), v(n), w(n, 0.0), w1(n, 0.0), w2(n, 0.0), t(n);
  Mop(r1, y);
  double beta1 = dot(r1, y);
  if (beta1 < 0.0) throw std::runtime_error("pminres: preconditioner is not positive definite");
  if (beta1 == 0.0) return {0, 0.0, true};
  beta1 = std::sqrt(beta1);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  MinresResult res;
  while (res.iterations < maxit) {
    ++res.iterations;
    for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / beta;
    Aop(v, t);
    if (res.iterations >= 2)
      for (std::size_t i = 0; i < n; ++i) t[i] -= (beta / oldb) * r1[i];
    const double alfa = dot(v, t);
    for (std::size_t i = 0; i < n; ++i) t[i] -= (alfa / beta) * r2[i];
    r1.swap(r2);
    r2.swap(t);
    Mop(r2, y);
    oldb = beta;
    const double bb = dot(r2, y);
    if (bb < 0.0) throw std::runtime_error("pminres: preconditioner is not positive definite");
    beta = std::sqrt(bb);
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    w1.swap(w2);
    w2.swap(w);
    for (std::size_t i = 0; i < n; ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
    for (std::size_t i = 0; i < n; ++i) x[i] += phi * w[i];
    if (phibar <= rtol * beta1) {
      res.converged = true;
      break;
    }
  }
  res.rel_residual = phibar / beta1;
  return res;
}

}  // namespace detail

// ---- deflation ----------------------------------------------------------

// Multiplicative deflation over the Z2 orbits of the known solutions:
//   M(u) = prod_k (1 + 1/||u - u_k||_H01^2)(1 + 1/||u + u_k||_H01^2).
class Deflation {
 public:
  explicit Deflation(std::vector<ScalarField> known = {}) : known_(std::move(known)) {}
  bool empty() const { return known_.empty(); }
  const std::vector<ScalarField>& known() const { return known_; }

  double factor(const ScalarField& u) const {
    double m = 1.0;
    for (const auto& w : known_)
      for (double sign : {1.0, -1.0}) {
        const double d2 = std::max(detail::dirichlet_form(subtracted(u, scaled(w, sign))), 1e-30);
        m *= 1.0 + 1.0 / d2;
      }
    return m;
  }

  // Sobolev gradient of log M at u (H01 Riesz representative).
  ScalarField log_gradient(const ScalarField& u) const {
    ScalarField g(u.grid(), NodeSet::interior, 0.0);
    for (const auto& w : known_)
      for (double sign : {1.0, -1.0}) {
        ScalarField diff = subtracted(u, scaled(w, sign));
        const double d2 = std::max(detail::dirichlet_form(diff), 1e-30);
        const double coef = -2.0 / (d2 * d2) / (1.0 + 1.0 / d2);
        axpy(coef, diff, g);
      }
    return g;
  }

 private:
  std::vector<ScalarField> known_;
};

// ---- geometry verifier ---------------------------------------------------

struct SubspaceRadius {
  int dim = 0;
  double R = 0.0;
};

struct GeometryReport {
  int k_omega = 1;        // factor-2-corrected rule: min{k : 2(sup|chi| s + w) < lambda_k}
  int k_omega_paper = 1;  // the rule as printed: min{k : sup|chi| s + w < lambda_k}
  int dim_V = 0;
  int case_id = 1;  // 1: V = {0}; 2: eigenvalue splitting
  double chi_sup = 0.0;
  double safety = 1.0;
  double threshold = 0.0;  // 2 (sup|chi| safety + omega)
  double rho = 0.0;
  double alpha = 0.0;
  std::vector<SubspaceRadius> subspaces;
  std::vector<std::pair<std::string, double>> threshold_checks;  // (condition, margin)
};

// Unit H01-norm direction in the L2-orthogonal complement of the first
// `dim_v` basis vectors.
inline ScalarField sample_direction_in_X(const GridDomain& g, const EigenBasis& basis, int dim_v,
                                         detail::NormalSource& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    ScalarField w = rng.field(g);
    for (int k = 0; k < dim_v; ++k)
      axpy(-dot_l2(w, basis.vectors[k]), basis.vectors[k], w);
    const double n = norm(w, NormKind::H01);
    if (n > 1e-8) return scaled(w, 1.0 / n);
  }
  throw std::runtime_error("sample_direction_in_X: degenerate sampling");
}

inline GeometryReport verify_geometry(const ProblemConfig& cfg, EigenBasis& basis,
                                      int probes = 32, std::uint64_t seed = 42) {
  GeometryReport rep;
  rep.chi_sup = cfg.lift.sup_norm;
  rep.safety = cfg.chi_safety;
  const double Lambda = rep.chi_sup * rep.safety + cfg.omega;
  rep.threshold = 2.0 * Lambda;

  // Extend the basis until it covers the splitting index.
  int need = std::max(4, basis.count());
  while (basis.count() == 0 || basis.lambdas.back() <= rep.threshold) {
    need = std::max(need, basis.count() + 4);
    if (need > cfg.grid.interior_count())
      throw std::runtime_error("verify_geometry: threshold above the discrete spectrum");
    basis = eigenpairs(cfg.grid, need, cfg.lin);
  }
  auto first_above = [&](double bound) {
    for (int k = 0; k < basis.count(); ++k)
      if (basis.lambdas[k] > bound) return k + 1;
    return basis.count() + 1;
  };
  rep.k_omega = first_above(rep.threshold);
  rep.k_omega_paper = first_above(Lambda);
  rep.dim_V = rep.k_omega - 1;
  rep.case_id = rep.dim_V == 0 ? 1 : 2;
  rep.threshold_checks.emplace_back("2(sup|chi| safety + omega) < lambda_{k_omega}",
                                    basis.lambdas[rep.k_omega - 1] - rep.threshold);

  detail::NormalSource rng(seed);
  std::vector<ScalarField> dirs;
  dirs.reserve(probes);
  for (int i = 0; i < probes; ++i)
    dirs.push_back(sample_direction_in_X(cfg.grid, basis, rep.dim_V, rng));

  // rho search: geometric scan maximizing the sampled sphere minimum.
  double best_rho = 0.0, best_alpha = -std::numeric_limits<double>::infinity();
  ScalarField worst_dir = dirs[0];
  for (int j = 0; j <= 24; ++j) {
    const double rho = std::pow(0.5, j) * 2.0;
    double alpha = std::numeric_limits<double>::infinity();
    const ScalarField* worst = nullptr;
    for (const auto& v : dirs) {
      const double jv = eval_J(scaled(v, rho), cfg);
      if (jv < alpha) {
        alpha = jv;
        worst = &v;
      }
    }
    if (alpha > best_alpha) {
      best_alpha = alpha;
      best_rho = rho;
      if (worst != nullptr) worst_dir = *worst;
    }
    if (best_alpha > 0.0 && alpha < best_alpha * 0.25) break;  // past the optimum
  }
  rep.rho = best_rho;
  rep.alpha = best_alpha;
  if (!(rep.alpha > 0.0)) {
    double l2 = 0.0;
    for (double x : worst_dir.values()) l2 += x * x;
    throw std::runtime_error(
        "verify_geometry: no radius gives a positive sphere minimum (J(rho v) = " +
        std::to_string(best_alpha) + "); the configuration violates the geometry hypotheses");
  }
  rep.threshold_checks.emplace_back("min J on the rho-sphere in X (= alpha) > 0", rep.alpha);

  // Outer negativity on probed finite-dimensional subspaces: find the radius
  // past which every sampled ray is nonpositive, double it as margin, then
  // harden it against a fresh batch of rays.
  double min_outer_margin = std::numeric_limits<double>::infinity();
  for (int m : {1, 2, 4}) {
    if (m > basis.count()) break;
    auto sample_ray = [&]() {
      ScalarField v(cfg.grid, NodeSet::interior, 0.0);
      for (int k = 0; k < m; ++k) axpy(rng(), basis.vectors[k], v);
      const double nv = norm(v, NormKind::H01);
      if (nv < 1e-12)
        return scaled(basis.vectors[0], 1.0 / norm(basis.vectors[0], NormKind::H01));
      return scaled(v, 1.0 / nv);
    };
    double R = 0.0;
    for (int trial = 0; trial < probes; ++trial) {
      ScalarField v = sample_ray();
      double t = 1.0;
      int guard = 0;
      while (guard++ < 60 &&
             (eval_J(scaled(v, t), cfg) > 0.0 || eval_J(scaled(v, 2.0 * t), cfg) > 0.0))
        t *= 2.0;
      if (guard >= 60) throw std::runtime_error("verify_geometry: ray never turns negative");
      R = std::max(R, t);
    }
    R *= 2.0;
    for (int round = 0; round < 6; ++round) {
      bool all_negative = true;
      for (int trial = 0; trial < probes; ++trial) {
        ScalarField v = sample_ray();
        if (eval_J(scaled(v, R), cfg) > 0.0 || eval_J(scaled(v, 2.0 * R), cfg) > 0.0) {
          all_negative = false;
          break;
        }
      }
      if (all_negative) break;
      R *= 2.0;
    }
    {
      ScalarField v = sample_ray();
      min_outer_margin = std::min(min_outer_margin, -eval_J(scaled(v, R), cfg));
    }
    rep.subspaces.push_back({m, R});
  }
  rep.threshold_checks.emplace_back("-J at the outer radius on a fresh ray", min_outer_margin);
  return rep;
}

// ---- mountain pass -------------------------------------------------------

struct MountainPassStats {
  long descent_iters = 0;
  long newton_iters = 0;
  std::string note;
};

namespace detail {

struct PathNode {
  ScalarField u;
  std::optional<JEvaluation> j;     // plain J and its potential
  std::optional<double> j_defl;     // deflated value
};

struct EnergyContext {
  const ProblemConfig& cfg;
  const Deflation& defl;

  // Evaluates J (and the deflated value) caching the potential per node;
  // the memo lives with the node and dies when the node moves.
  void ensure(PathNode& node, const PhiResult* warm = nullptr) const {
    if (!node.j) {
      node.j = eval_J_with_phi(node.u, cfg, warm);
      node.j_defl.reset();
    }
    if (!node.j_defl)
      node.j_defl = defl.empty() ? node.j->value : defl.factor(node.u) * node.j->value;
  }
};

inline SolutionRecord assemble_record(const ScalarField& u, const ProblemConfig& cfg,
                                      double path_energy, long iterations, int deflation_index,
                                      std::uint64_t seed) {
  SolutionRecord rec;
  rec.u = u;
  JEvaluation j = eval_J_with_phi(u, cfg);
  GradientPair gp = grad_J(u, cfg, &j.phi);
  ScalarField phi_int = added(j.phi.phi, interior_part(cfg.lift.chi));
  ScalarField theta_int = added(j.phi.theta, interior_part(cfg.lift.theta));
  rec.phi_full = with_boundary(phi_int, cfg.lift.h1);
  rec.theta_full = with_boundary(theta_int, cfg.lift.h2);
  rec.omega = cfg.omega;
  rec.J_value = j.value;
  rec.dual_norm = gp.dual_norm;
  rec.path_energy = path_energy;
  rec.u_l2 = norm(u, NormKind::L2);
  rec.iterations = iterations;
  rec.deflation_index = deflation_index;
  rec.seed = seed;
  rec.nontrivial = rec.u_l2 > cfg.trivial_tol;
  rec.converged = gp.dual_norm <= cfg.dual_tol;
  return rec;
}

}  // namespace detail

// Newton polish on the undeflated functional: solves the critical-point
// system J'(u) = 0 with Hessian actions and a (1/2)(-Delta)-preconditioned
// MINRES, backtracking on the dual norm. Returns false if it cannot reach
// the tolerance from this starting point.
struct PolishResult {
  ScalarField u;
  double J_value = 0.0;
  double dual_norm = 0.0;
  long newton_iters = 0;
  bool ok = false;
};

inline PolishResult newton_polish(ScalarField u, const ProblemConfig& cfg, double tol,
                                  long max_newton = 40) {
  const GridDomain& g = cfg.grid;
  EllipticOperator lap(g, OperatorKind::neg_laplacian);
  BoundaryData zero(g);
  PolishResult out;
  JEvaluation j = eval_J_with_phi(u, cfg);
  GradientPair gp = grad_J(u, cfg, &j.phi);
  for (long it = 0; it < max_newton && gp.dual_norm > tol; ++it) {
    ++out.newton_iters;
    auto Mop = [&](const std::vector<double>& rin, std::vector<double>& rout) {
      ScalarField r(g, NodeSet::interior, rin);
      rout = scaled(solve_dirichlet(lap, r, zero, cfg.lin), 2.0).values();
    };
    std::vector<double> rhs = gp.dual.values();
    for (double& x : rhs) x = -x;
    const double forcing = std::min(0.1, std::sqrt(gp.dual_norm));

    // Escalating Levenberg shift (in preconditioned-spectrum units) guards
    // against the near-singular Hessian surface between 0 and the saddle.
    bool accepted = false;
    for (double shift : {0.0, 0.25, 1.0, 4.0}) {
      auto Aop = [&](const std::vector<double>& vin, std::vector<double>& vout) {
        ScalarField v(g, NodeSet::interior, vin);
        vout = hessian_apply(u, j.phi, v, cfg).values();
        if (shift != 0.0) {
          ScalarField av = apply(lap, v);
          for (index_t i = 0; i < v.size(); ++i) vout[i] += shift * 0.5 * av[i];
        }
      };
      std::vector<double> step;
      detail::pminres(Aop, Mop, rhs, step, forcing, 250);
      ScalarField s(g, NodeSet::interior, std::move(step));
      double sigma = 1.0;
      for (int bt = 0; bt < 10; ++bt, sigma *= 0.5) {
        try {
          ScalarField trial = added(u, scaled(s, sigma));
          JEvaluation jt = eval_J_with_phi(trial, cfg, &j.phi);
          GradientPair gt = grad_J(trial, cfg, &jt.phi);
          if (gt.dual_norm <= (1.0 - 1e-4 * sigma) * gp.dual_norm) {
            u = std::move(trial);
            j = std::move(jt);
            gp = std::move(gt);
            accepted = true;
            break;
          }
        } catch (const std::exception&) {
          // overflowing trial; keep backtracking
        }
      }
      if (accepted) break;
    }
    if (!accepted) break;
  }
  out.u = std::move(u);
  out.J_value = j.value;
  out.dual_norm = gp.dual_norm;
  out.ok = gp.dual_norm <= tol;
  return out;
}

// Discretized-path minimax descent (move-the-max with Sobolev gradients and
// Armijo backtracking), optionally on a deflated functional, followed by a
// Newton polish of the maximal node on the plain functional.
inline SolutionRecord mountain_pass(const ProblemConfig& cfg, ScalarField endpoint_e,
                                    int path_nodes = 17, long max_iters = 4000,
                                    double tol = -1.0, const Deflation& defl = Deflation{},
                                    std::uint64_t seed = 42,
                                    MountainPassStats* stats = nullptr) {
  if (tol < 0.0) tol = cfg.dual_tol;
  if (path_nodes < 5) throw std::invalid_argument("mountain_pass: path_nodes >= 5");
  const GridDomain& g = cfg.grid;
  detail::EnergyContext ctx{cfg, defl};

  // Scale the endpoint outward until J <= 0; if the functional never turns
  // negative along this ray (the unperturbed sub-threshold case) the
  // endpoint is left movable and the path collapses to the trivial record.
  bool endpoint_fixed = true;
  {
    int guard = 0;
    while (guard++ < 48 && eval_J(endpoint_e, cfg) > 0.0) endpoint_e = scaled(endpoint_e, 2.0);
    if (eval_J(endpoint_e, cfg) > 0.0) {
      endpoint_fixed = false;
      // keep a moderate endpoint; descent will pull it in
      endpoint_e = scaled(endpoint_e, std::pow(0.5, 40));
    }
  }

  const int m = path_nodes;
  std::vector<detail::PathNode> path(m);
  for (int k = 0; k < m; ++k)
    path[k].u = scaled(endpoint_e, static_cast<double>(k) / (m - 1));

  auto max_node = [&]() {
    const int last = endpoint_fixed ? m - 2 : m - 1;
    int best = 1;
    double best_j = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= last; ++k) {
      ctx.ensure(path[k]);
      if (*path[k].j_defl > best_j) {  // lowest index wins ties
        best_j = *path[k].j_defl;
        best = k;
      }
    }
    return best;
  };

  long it = 0;
  double last_step = 1.0;
  int stalls = 0;
  std::string note;
  double path_energy = 0.0;
  int jmax = max_node();

  auto path_collapsed = [&]() {
    for (const auto& node : path)
      if (norm(node.u, NormKind::L2) > cfg.trivial_tol) return false;
    return true;
  };

  for (; it < max_iters; ++it) {
    jmax = max_node();
    detail::PathNode& node = path[jmax];
    ctx.ensure(node);
    path_energy = node.j->value;

    // collapse to trivial: the whole path has shrunk to nothing
    if (norm(node.u, NormKind::L2) <= cfg.trivial_tol && path_collapsed()) {
      note = "collapsed to the trivial critical point";
      break;
    }

    GradientPair gp = grad_J(node.u, cfg, &node.j->phi);
    ScalarField direction = gp.sobolev;
    double defl_factor = 1.0;
    if (!defl.empty()) {
      defl_factor = defl.factor(node.u);
      // grad(M J) = M grad J + M J grad(log M)
      direction = scaled(direction, defl_factor);
      axpy(defl_factor * node.j->value, defl.log_gradient(node.u), direction);
    }
    const double dn = norm(direction, NormKind::H01);
    if (dn <= tol) break;  // descent target met; polish finishes the job

    // Armijo backtracking along the (deflated) Sobolev gradient, with the
    // displacement per move capped so nodes cannot teleport across the
    // landscape (or into a deflation pole).
    const double cap = 0.5 * norm(node.u, NormKind::H01) + 0.05;
    double step = std::min(std::max(last_step * 2.0, 1e-6), cap / dn);
    const double ref = *node.j_defl;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt, step *= 0.5) {
      detail::PathNode trial;
      trial.u = added(node.u, scaled(direction, -step));
      try {
        ctx.ensure(trial, &node.j->phi);
      } catch (const std::exception&) {
        continue;  // overflowing trial value
      }
      if (*trial.j_defl <= ref - 0.25 * step * dn * dn) {
        node = std::move(trial);
        last_step = step;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (++stalls >= 2) {
        note = "line search stalled; switching to polish";
        break;
      }
      last_step = std::max(last_step * 0.25, 1e-12);
    } else {
      stalls = 0;
    }

    // Switch to the endgame once the deflated gradient is small.
    if (dn <= std::max(1e-3, 10.0 * tol) && it > 5) break;

    // Re-equidistribute in H01 arc length every 10 iterations.
    if ((it + 1) % 10 == 0) {
      std::vector<double> s(m, 0.0);
      for (int k = 1; k < m; ++k)
        s[k] = s[k - 1] + norm(subtracted(path[k].u, path[k - 1].u), NormKind::H01);
      if (s[m - 1] > 1e-14) {
        std::vector<detail::PathNode> fresh(m);
        fresh[0].u = path[0].u;
        fresh[m - 1].u = path[m - 1].u;
        for (int k = 1; k < m - 1; ++k) {
          const double target = s[m - 1] * k / (m - 1);
          int seg = 1;
          while (seg < m - 1 && s[seg] < target) ++seg;
          const double w = (target - s[seg - 1]) / std::max(s[seg] - s[seg - 1], 1e-300);
          fresh[k].u = added(scaled(path[seg - 1].u, 1.0 - w), scaled(path[seg].u, w));
        }
        path = std::move(fresh);
      }
    }
  }

  // Endgame on the plain functional from the maximal node. The polish keeps
  // the dual norm monotone, so its result is always at least as good; if it
  // slides into the trivial basin the record honestly reports a collapse.
  jmax = max_node();
  ScalarField u_best = path[jmax].u;
  long newton_iters = 0;
  if (norm(u_best, NormKind::L2) > cfg.trivial_tol) {
    PolishResult polish = newton_polish(u_best, cfg, tol);
    newton_iters = polish.newton_iters;
    u_best = std::move(polish.u);
  }

  SolutionRecord rec = detail::assemble_record(u_best, cfg, path_energy, it, 0, seed);
  if (stats != nullptr) {
    stats->descent_iters = it;
    stats->newton_iters = newton_iters;
    stats->note = note;
  }
  return rec;
}

// ---- deflated multi-solution driver --------------------------------------

struct DeflatedResult {
  std::vector<SolutionRecord> records;
  int attempts = 0;
  std::string shortfall;  // empty when `count` records were found
};

inline bool orbits_separated(const ScalarField& a, const ScalarField& b, double rel_threshold) {
  const double na = norm(a, NormKind::H01), nb = norm(b, NormKind::H01);
  const double sep = std::min(norm(subtracted(a, b), NormKind::H01),
                              norm(added(a, b), NormKind::H01));
  return sep > rel_threshold * std::max(na, nb);
}

inline DeflatedResult deflated_solve(const ProblemConfig& cfg, int count, std::uint64_t seed,
                                     int path_nodes = 17, long max_iters = 4000,
                                     double separation = 1e-3) {
  if (count < 1) throw std::invalid_argument("deflated_solve: count >= 1");
  DeflatedResult out;
  const int basis_k = std::min<index_t>(4, cfg.grid.interior_count());
  EigenBasis basis = eigenpairs(cfg.grid, basis_k, cfg.lin);
  detail::NormalSource rng(seed);

  const int max_attempts = std::max(4 * count, 8);
  std::vector<ScalarField> known;
  while (static_cast<int>(out.records.size()) < count && out.attempts < max_attempts) {
    ++out.attempts;
    ScalarField e(cfg.grid, NodeSet::interior, 0.0);
    if (out.attempts == 1) {
      e = basis.vectors[0];
    } else {
      for (int k = 0; k < basis.count(); ++k) axpy(rng(), basis.vectors[k], e);
      const double n = norm(e, NormKind::H01);
      if (n < 1e-12) continue;
      e = scaled(e, 1.0 / n);
    }
    SolutionRecord rec = mountain_pass(cfg, e, path_nodes, max_iters, cfg.dual_tol,
                                       Deflation(known), seed + out.attempts);
    if (!rec.converged || !rec.nontrivial) continue;
    bool fresh = true;
    for (const auto& r : out.records)
      if (!orbits_separated(rec.u, r.u, separation)) fresh = false;
    if (!fresh) continue;
    known.push_back(rec.u);
    out.records.push_back(std::move(rec));
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const SolutionRecord& a, const SolutionRecord& b) { return a.J_value < b.J_value; });
  for (std::size_t k = 0; k < out.records.size(); ++k)
    out.records[k].deflation_index = static_cast<int>(k);
  if (static_cast<int>(out.records.size()) < count)
    out.shortfall = "found " + std::to_string(out.records.size()) + " of " +
                    std::to_string(count) + " requested records in " +
                    std::to_string(out.attempts) + " attempts";
  return out;
}

// Grid-sequenced refinement: prolong a converged record onto a finer grid
// and re-converge it there with the Newton polish.
inline SolutionRecord refine_record(const SolutionRecord& rec, const ProblemConfig& fine_cfg,
                                    double tol = -1.0) {
  if (tol < 0.0) tol = fine_cfg.dual_tol;
  ScalarField u0 = prolongate(rec.u, fine_cfg.grid);
  PolishResult polish = newton_polish(std::move(u0), fine_cfg, tol);
  SolutionRecord fine = detail::assemble_record(polish.u, fine_cfg, rec.path_energy,
                                                polish.newton_iters, rec.deflation_index,
                                                rec.seed);
  return fine;
}

// ---- omega sweep ----------------------------------------------------------

struct OmegaBranch {
  double omega = 0.0;
  std::vector<SolutionRecord> records;
  std::string error;  // nonempty when this entry failed
};

inline std::vector<OmegaBranch> omega_sweep(const ProblemConfig& base,
                                            const std::vector<double>& omegas, int count,
                                            std::uint64_t seed, int path_nodes = 17,
                                            long max_iters = 4000) {
  std::vector<OmegaBranch> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    OmegaBranch branch;
    branch.omega = w;
    try {
      ProblemConfig cfg = base;
      cfg.omega = w;
      branch.records = deflated_solve(cfg, count, seed, path_nodes, max_iters).records;
    } catch (const std::exception& e) {
      branch.error = e.what();
    }
    out.push_back(std::move(branch));
  }
  return out;
}

}  // namespace sbp
