#pragma once

// The admissible perturbation g(x, xi) with antiderivative G. Two built-in
// families: the odd power a(x)|xi|^{p-2} xi (the working witness) and the
// zero nonlinearity (unperturbed problem). A sampling validator checks the
// four admissibility conditions and certifies the lower-bound constants
// b1, b2 with G >= b1 |xi|^mu - b2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbp/grid.hpp"

namespace sbp {

enum class NonlinearityFamily { power, zero };

struct NonlinearitySpec {
  NonlinearityFamily family = NonlinearityFamily::power;
  double p = 5.0;   // growth exponent
  double mu = 5.0;  // superquadraticity exponent, defaults to p
  double r = 1.0;   // threshold in the superquadraticity condition
  double amplitude = 1.0;
  std::optional<ScalarField> amplitude_field;  // nodal weight a(x), constant if absent

  // growth constants |g| <= a1 + a2 |xi|^{p-1}; closed form for the family
  double a1 = 0.0;
  double a2 = 1.0;
  // lower-bound constants, certified by validate_conditions
  double b1 = 0.0;
  double b2 = 0.0;

  bool is_zero() const { return family == NonlinearityFamily::zero; }

  double amp_at(index_t interior_idx) const {
    return amplitude_field ? (*amplitude_field)[interior_idx] : amplitude;
  }
  double amp_max() const {
    if (!amplitude_field) return amplitude;
    return norm(*amplitude_field, NormKind::Linf);
  }
  double amp_min() const {
    if (!amplitude_field) return amplitude;
    double m = (*amplitude_field)[0];
    for (double v : amplitude_field->values()) m = std::min(m, v);
    return m;
  }
};

inline NonlinearitySpec power_nonlinearity(double p = 5.0, double mu = -1.0, double r = 1.0,
                                           double amplitude = 1.0) {
  NonlinearitySpec s;
  s.family = NonlinearityFamily::power;
  s.p = p;
  s.mu = mu > 0 ? mu : p;
  s.r = r;
  s.amplitude = amplitude;
  s.a1 = 0.0;
  s.a2 = amplitude;
  s.b1 = amplitude / p;
  s.b2 = 0.0;
  return s;
}

inline NonlinearitySpec zero_nonlinearity() {
  NonlinearitySpec s;
  s.family = NonlinearityFamily::zero;
  s.a1 = s.a2 = s.b1 = s.b2 = 0.0;
  return s;
}

inline double eval_g(const NonlinearitySpec& s, index_t x_idx, double xi) {
  if (s.family == NonlinearityFamily::zero) return 0.0;
  if (xi == 0.0) return 0.0;
  return s.amp_at(x_idx) * std::pow(std::abs(xi), s.p - 2.0) * xi;
}

inline double eval_G(const NonlinearitySpec& s, index_t x_idx, double xi) {
  if (s.family == NonlinearityFamily::zero) return 0.0;
  return s.amp_at(x_idx) * std::pow(std::abs(xi), s.p) / s.p;
}

// Derivative d g / d xi, used by the Newton polish.
inline double eval_g_prime(const NonlinearitySpec& s, index_t x_idx, double xi) {
  if (s.family == NonlinearityFamily::zero) return 0.0;
  if (xi == 0.0) return 0.0;
  return s.amp_at(x_idx) * (s.p - 1.0) * std::pow(std::abs(xi), s.p - 2.0);
}

struct ConditionCheck {
  std::string name;
  bool passed = false;
  double margin = 0.0;       // worst-case slack (negative when violated)
  double worst_xi = 0.0;     // sample at which the worst case occurred
  index_t worst_x = 0;
  std::string detail;
};

struct ConditionReport {
  ConditionCheck g1, g2, g3, g4;
  double decay_rate_at_smallest = 0.0;  // |g/xi| at the smallest sampled xi
  double fitted_b1 = 0.0;
  double fitted_b2 = 0.0;
  bool lower_bound_holds = false;
  bool all_passed() const { return g1.passed && g2.passed && g3.passed && g4.passed; }
  std::vector<const ConditionCheck*> failures() const {
    std::vector<const ConditionCheck*> f;
    for (const auto* c : {&g1, &g2, &g3, &g4})
      if (!c->passed) f.push_back(c);
    return f;
  }
};

// Samples the four conditions over `sample_xis` x the given interior node
// indices, fits b1/b2 on the same samples and stores them in the spec.
//
// The vanishing-slope condition is checked on a geometric sequence xi -> 0:
// the ratio |g/xi| must fall below `tolerance` at the smallest sampled xi
// (a numerical tool cannot verify the limit itself).
inline ConditionReport validate_conditions(NonlinearitySpec& spec,
                                           const std::vector<double>& sample_xis,
                                           double tolerance,
                                           const std::vector<index_t>& x_samples = {0}) {
  if (sample_xis.empty()) throw std::invalid_argument("validate_conditions: empty sample set");
  double r_max = 0.0;
  for (double xi : sample_xis) r_max = std::max(r_max, std::abs(xi));
  if (r_max < spec.r)
    throw std::invalid_argument("validate_conditions: samples must span [-R, R] with R >= r");

  ConditionReport rep;
  auto set_worst = [](ConditionCheck& c, double margin, double xi, index_t x) {
    if (margin < c.margin) {
      c.margin = margin;
      c.worst_xi = xi;
      c.worst_x = x;
    }
  };

  // (g1) anti-symmetry: |g(x,-xi) + g(x,xi)| <= tol
  rep.g1.name = "g1 (anti-symmetry)";
  rep.g1.margin = std::numeric_limits<double>::infinity();
  for (index_t x : x_samples)
    for (double xi : sample_xis) {
      const double viol = std::abs(eval_g(spec, x, -xi) + eval_g(spec, x, xi));
      set_worst(rep.g1, tolerance - viol, xi, x);
    }
  rep.g1.passed = rep.g1.margin >= 0.0;

  // (g2) g(x,xi)/xi -> 0: geometric sequence from r down to ~1e-9 r
  rep.g2.name = "g2 (vanishing slope at 0)";
  rep.g2.margin = std::numeric_limits<double>::infinity();
  {
    double worst_final = 0.0;
    for (index_t x : x_samples) {
      double xi = std::max(spec.r, 1.0);
      double ratio = 0.0;
      for (int step = 0; step < 60; ++step) {
        ratio = std::abs(eval_g(spec, x, xi) / xi);
        if (xi < 1e-12) break;
        xi *= 0.5;
      }
      worst_final = std::max(worst_final, ratio);
      set_worst(rep.g2, tolerance - ratio, xi, x);
    }
    rep.decay_rate_at_smallest = worst_final;
  }
  rep.g2.passed = rep.g2.margin >= 0.0;

  // (g3) growth: |g| <= a1 + a2 |xi|^{p-1} with the certified constants
  rep.g3.name = "g3 (growth bound)";
  rep.g3.margin = std::numeric_limits<double>::infinity();
  for (index_t x : x_samples)
    for (double xi : sample_xis) {
      const double bound = spec.a1 + spec.a2 * std::pow(std::abs(xi), spec.p - 1.0);
      set_worst(rep.g3, bound - std::abs(eval_g(spec, x, xi)) + tolerance * std::max(1.0, bound),
                xi, x);
    }
  rep.g3.passed = rep.g3.margin >= 0.0;

  // (g4) superquadraticity: 0 <= mu G <= xi g for |xi| >= r
  rep.g4.name = "g4 (superquadraticity)";
  rep.g4.margin = std::numeric_limits<double>::infinity();
  for (index_t x : x_samples)
    for (double xi : sample_xis) {
      if (std::abs(xi) < spec.r) continue;
      const double muG = spec.mu * eval_G(spec, x, xi);
      const double xig = xi * eval_g(spec, x, xi);
      const double scale = std::max({1.0, std::abs(muG), std::abs(xig)});
      set_worst(rep.g4, std::min(muG, xig - muG) + tolerance * scale, xi, x);
    }
  rep.g4.passed = rep.g4.margin >= 0.0;

  // Fit G >= b1 |xi|^mu - b2 on the sample set.
  double b1 = std::numeric_limits<double>::infinity();
  for (index_t x : x_samples)
    for (double xi : sample_xis) {
      if (std::abs(xi) < spec.r) continue;
      b1 = std::min(b1, eval_G(spec, x, xi) / std::pow(std::abs(xi), spec.mu));
    }
  if (!std::isfinite(b1) || b1 <= 0.0) b1 = spec.is_zero() ? 0.0 : 1e-12;
  double b2 = 0.0;
  for (index_t x : x_samples)
    for (double xi : sample_xis)
      b2 = std::max(b2, b1 * std::pow(std::abs(xi), spec.mu) - eval_G(spec, x, xi));
  rep.fitted_b1 = b1;
  rep.fitted_b2 = b2;
  rep.lower_bound_holds = true;
  for (index_t x : x_samples)
    for (double xi : sample_xis)
      if (eval_G(spec, x, xi) < b1 * std::pow(std::abs(xi), spec.mu) - b2 - 1e-12)
        rep.lower_bound_holds = false;
  spec.b1 = b1;
  spec.b2 = b2;

  for (ConditionCheck* c : {&rep.g1, &rep.g2, &rep.g3, &rep.g4})
    if (!c->passed) {
      std::ostringstream os;
      os << c->name << " violated at xi = " << c->worst_xi << ", x index " << c->worst_x
         << " (margin " << c->margin << ")";
      c->detail = os.str();
    }
  return rep;
}

// Throwing wrapper for pipeline use.
inline ConditionReport require_valid_nonlinearity(NonlinearitySpec& spec,
                                                  const std::vector<double>& sample_xis,
                                                  double tolerance) {
  ConditionReport rep = validate_conditions(spec, sample_xis, tolerance);
  if (!rep.all_passed()) {
    std::string msg = "nonlinearity validation failed:";
    for (const auto* c : rep.failures()) msg += " [" + c->detail + "]";
    throw std::runtime_error(msg);
  }
  return rep;
}

// Default validation sample set: symmetric geometric + linear mix on [-R, R].
inline std::vector<double> default_xi_samples(double R = 5.0, int count = 200) {
  std::vector<double> xs;
  xs.reserve(2 * count + 1);
  for (int i = 1; i <= count; ++i) {
    const double t = R * i / count;
    xs.push_back(t);
    xs.push_back(-t);
  }
  xs.push_back(0.0);
  return xs;
}

}  // namespace sbp
