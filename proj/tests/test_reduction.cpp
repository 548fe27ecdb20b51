#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "sbp/reduction.hpp"
#include "support/test_support.hpp"

using namespace sbp;

namespace {

ScalarField sin_product(const GridDomain& g) {
  return interior_field(g, [](double x, double y, double z) {
    return std::sin(M_PI * x) * std::sin(M_PI * y) * std::sin(M_PI * z);
  });
}

bool bitwise_equal(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.values().data(), b.values().data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("Phi(0) = 0 exactly") {
  GridDomain g = build_grid(3, {7, 7, 7}, {1.0, 1.0, 1.0});
  ScalarField zero(g, NodeSet::interior, 0.0);
  PhiResult r = solve_phi(zero);
  for (index_t i = 0; i < r.phi.size(); ++i) {
    CHECK(r.phi[i] == 0.0);
    CHECK(r.theta[i] == 0.0);
  }
  CHECK(r.h_norm == 0.0);
}

TEST_CASE("manufactured source reproduces the sin-product potential") {
  GridDomain g = build_grid(3, {15, 15, 15}, {1.0, 1.0, 1.0});
  const double c = 3.0 * M_PI * M_PI + 9.0 * M_PI * M_PI * M_PI * M_PI;
  ScalarField s = sin_product(g);
  ScalarField u = s;
  for (double& v : u.values()) v = std::sqrt(c * v / (4.0 * M_PI));
  PhiResult r = solve_phi(u, {1e-12, 1e-14, 40000});
  double worst = 0.0;
  for (index_t i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(r.phi[i] - s[i]));
  CHECK(worst <= 0.02);
}

TEST_CASE("quadratic scaling of Phi") {
  GridDomain g = build_grid(3, {7, 7, 7}, {1.0, 1.0, 1.0});
  ScalarField u = testsup::random_interior_field(g, 5150);
  SolveOptions tight{1e-12, 1e-14, 40000};
  PhiResult base = solve_phi(u, tight);
  for (double t : {-2.0, 0.5, 3.0}) {
    PhiResult scaled_r = solve_phi(scaled(u, t), tight);
    ScalarField expected = scaled(base.phi, t * t);
    ScalarField diff = subtracted(scaled_r.phi, expected);
    CHECK(norm(diff, NormKind::L2) <= 1e-8 * std::max(norm(expected, NormKind::L2), 1e-30));
  }
  // t = 0 degenerates to the zero solution
  PhiResult z = solve_phi(scaled(u, 0.0), tight);
  CHECK(z.h_norm == 0.0);
}

TEST_CASE("evenness of Phi is bitwise") {
  GridDomain g = build_grid(3, {7, 7, 7}, {1.0, 1.0, 1.0});
  ScalarField u = testsup::random_interior_field(g, 999);
  PhiResult a = solve_phi(u);
  PhiResult b = solve_phi(scaled(u, -1.0));
  CHECK(bitwise_equal(a.phi, b.phi));
}

TEST_CASE("Phi is nonnegative for every u") {
  GridDomain g = build_grid(3, {9, 9, 9}, {1.0, 1.0, 1.0});
  for (std::uint64_t s = 0; s < 10; ++s) {
    ScalarField u = testsup::random_interior_field(g, 7000 + s);
    PhiResult r = solve_phi(u);
    double mn = 0.0;
    for (index_t i = 0; i < r.phi.size(); ++i) mn = std::min(mn, r.phi[i]);
    CHECK(mn >= -1e-10);
  }
}

TEST_CASE("energy identity holds to solver accuracy") {
  GridDomain g = build_grid(3, {9, 9, 9}, {1.0, 1.0, 1.0});
  for (std::uint64_t s = 0; s < 5; ++s) {
    ScalarField u = testsup::random_interior_field(g, 300 + s);
    PhiResult r = solve_phi(u, {1e-12, 1e-14, 40000});
    CHECK(r.energy_identity_residual <= 1e-6);
    // h_norm is the H(Omega) norm of phi
    CHECK(r.h_norm == Catch::Approx(norm(r.phi, NormKind::HOmega)));
  }
}

TEST_CASE("certification ratio is scale-invariant per sample") {
  GridDomain g = build_grid(3, {7, 7, 7}, {1.0, 1.0, 1.0});
  ScalarField u = testsup::random_interior_field(g, 4242);
  SolveOptions tight{1e-12, 1e-14, 40000};
  auto ratio = [&](const ScalarField& v) {
    PhiResult r = solve_phi(v, tight);
    const double n = norm(v, NormKind::H01);
    return r.h_norm / (n * n);
  };
  const double r1 = ratio(u);
  const double r2 = ratio(scaled(u, 3.0));
  CHECK(r1 == Catch::Approx(r2).epsilon(1e-9));
}

TEST_CASE("certify_phi_bound returns a finite positive constant") {
  GridDomain g = build_grid(3, {7, 7, 7}, {1.0, 1.0, 1.0});
  const double c = certify_phi_bound(g, 10, 42);
  CHECK(c > 0.0);
  CHECK(std::isfinite(c));
  // deterministic for a fixed seed
  CHECK(certify_phi_bound(g, 10, 42) == c);
  CHECK_THROWS_AS(certify_phi_bound(g, 5, 42), std::invalid_argument);
}
