#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sbp/elliptic.hpp"
#include "sbp/grid.hpp"
#include "support/test_support.hpp"

using namespace sbp;

namespace {

ScalarField sin_product(const GridDomain& g) {
  return interior_field(g, [&](double x, double y, double z) {
    double v = std::sin(M_PI * x);
    if (g.dim() > 1) v *= std::sin(M_PI * y);
    if (g.dim() > 2) v *= std::sin(M_PI * z);
    return v;
  });
}

double rel_linf_error(const ScalarField& a, const ScalarField& b) {
  double num = 0.0, den = 0.0;
  for (index_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

}  // namespace

TEST_CASE("apply is exact on quadratics (1D)") {
  GridDomain g = build_grid(1, {63}, {1.0});
  EllipticOperator lap(g, OperatorKind::neg_laplacian);
  ScalarField u = interior_field(g, [](double x, double, double) { return x * (1.0 - x); });
  ScalarField img = apply(lap, u);  // zero boundary: x(1-x) vanishes at 0 and 1
  for (index_t i = 0; i < img.size(); ++i) CHECK(img[i] == Catch::Approx(2.0).margin(1e-10));
}

TEST_CASE("apply to the zero field is zero") {
  GridDomain g = build_grid(2, {7, 7}, {1.0, 1.0});
  EllipticOperator lap(g, OperatorKind::neg_laplacian);
  ScalarField z(g, NodeSet::interior, 0.0);
  ScalarField img = apply(lap, z);
  for (index_t i = 0; i < img.size(); ++i) CHECK(img[i] == 0.0);
}

TEST_CASE("apply on the cube sin-product matches 3 pi^2 u to O(h^2)") {
  GridDomain g = build_grid(3, {31, 31, 31}, {1.0, 1.0, 1.0});
  EllipticOperator lap(g, OperatorKind::neg_laplacian);
  ScalarField s = sin_product(g);
  ScalarField img = apply(lap, s);
  CHECK(rel_linf_error(img, scaled(s, 3.0 * M_PI * M_PI)) <= 0.01);
}

TEST_CASE("operator symmetry and positive definiteness on random fields") {
  GridDomain g = build_grid(3, {5, 6, 4}, {1.0, 1.3, 0.8});
  for (auto kind : {OperatorKind::neg_laplacian, OperatorKind::helmholtz}) {
    EllipticOperator op(g, kind);
    for (std::uint64_t s = 0; s < 5; ++s) {
      ScalarField v = testsup::random_interior_field(g, 40 + s);
      ScalarField w = testsup::random_interior_field(g, 50 + s);
      const double avw = dot_l2(apply(op, v), w);
      const double vaw = dot_l2(v, apply(op, w));
      CHECK(avw == Catch::Approx(vaw).epsilon(1e-12));
      CHECK(dot_l2(apply(op, v), v) > 0.0);
    }
  }
}

TEST_CASE("CG agrees with a dense solve on a small grid") {
  GridDomain g = build_grid(2, {4, 3}, {1.0, 1.0});
  EllipticOperator helm(g, OperatorKind::helmholtz);
  const index_t n = g.interior_count();
  // Assemble the dense matrix column by column through apply().
  std::vector<double> A(n * n);
  for (index_t c = 0; c < n; ++c) {
    ScalarField e(g, NodeSet::interior, 0.0);
    e[c] = 1.0;
    ScalarField col = apply(helm, e);
    for (index_t r = 0; r < n; ++r) A[r * n + c] = col[r];
  }
  ScalarField rhs = testsup::random_interior_field(g, 77);
  std::vector<double> x_dense = testsup::dense_solve(A, rhs.values());
  ScalarField x_cg = solve_dirichlet(helm, rhs, BoundaryData(g), {1e-12, 1e-14, 10000});
  for (index_t i = 0; i < n; ++i) CHECK(x_cg[i] == Catch::Approx(x_dense[i]).margin(1e-10));
}

TEST_CASE("Helmholtz with unit boundary data reproduces cosh profile (1D)") {
  GridDomain g = build_grid(1, {127}, {1.0});
  EllipticOperator helm(g, OperatorKind::helmholtz);
  ScalarField rhs(g, NodeSet::interior, 0.0);
  BoundaryData one(g, 1.0);
  ScalarField sol = solve_dirichlet(helm, rhs, one);
  // analytic: cosh(x - 1/2) / cosh(1/2); midpoint value frozen
  const index_t mid = g.interior_index(63);
  CHECK(g.interior_coords(mid)[0] == Catch::Approx(0.5).margin(1e-15));
  CHECK(std::abs(sol[mid] - 0.8868188839700739) <= 1e-3);
  ScalarField exact = interior_field(g, [](double x, double, double) {
    return std::cosh(x - 0.5) / std::cosh(0.5);
  });
  CHECK(rel_linf_error(sol, exact) <= 1e-3);
}

TEST_CASE("constants are discrete-harmonic with constant data") {
  GridDomain g = build_grid(2, {9, 9}, {1.0, 1.0});
  EllipticOperator lap(g, OperatorKind::neg_laplacian);
  ScalarField rhs(g, NodeSet::interior, 0.0);
  BoundaryData c(g, -2.25);
  ScalarField sol = solve_dirichlet(lap, rhs, c, {1e-12, 1e-14, 10000});
  for (index_t i = 0; i < sol.size(); ++i) CHECK(sol[i] == Catch::Approx(-2.25).margin(1e-10));
}

TEST_CASE("manufactured Poisson solution on the cube converges at second order") {
  double err[2];
  int idx = 0;
  for (int n : {15, 31}) {
    GridDomain g = build_grid(3, {n, n, n}, {1.0, 1.0, 1.0});
    EllipticOperator lap(g, OperatorKind::neg_laplacian);
    ScalarField s = sin_product(g);
    ScalarField rhs = scaled(s, 3.0 * M_PI * M_PI);
    ScalarField sol = solve_dirichlet(lap, rhs, BoundaryData(g), {1e-11, 1e-13, 20000});
    err[idx++] = rel_linf_error(sol, s);
  }
  CHECK(err[1] <= 0.01);
  CHECK(err[0] / err[1] >= 3.5);
}

TEST_CASE("solve_dirichlet reports failure loudly on iteration starvation") {
  GridDomain g = build_grid(2, {15, 15}, {1.0, 1.0});
  EllipticOperator lap(g, OperatorKind::neg_laplacian);
  ScalarField rhs = testsup::random_interior_field(g, 5);
  SolveOptions starved{1e-12, 0.0, 2};
  LinearSolveInfo info;
  CHECK_THROWS_WITH(solve_dirichlet(lap, rhs, BoundaryData(g), starved, &info),
                    Catch::Matchers::ContainsSubstring("did not converge"));
  CHECK_FALSE(info.converged);
  CHECK(info.residual > 0.0);
}

TEST_CASE("fourth-order solve: exponential data is reproduced") {
  GridDomain g = build_grid(1, {127}, {1.0});
  ScalarField rhs(g, NodeSet::interior, 0.0);
  BoundaryData he = boundary_data(g, [](double x, double, double) { return std::exp(x); });
  auto sol = solve_fourth_order(rhs, he, he, {1e-12, 1e-14, 20000});
  ScalarField exact = interior_field(g, [](double x, double, double) { return std::exp(x); });
  CHECK(rel_linf_error(sol.phi, exact) <= 5e-5);  // O(h^2) at n=127
  CHECK(rel_linf_error(sol.theta, exact) <= 5e-5);
}

TEST_CASE("fourth-order solve: exponential data on the cube") {
  GridDomain g = build_grid(3, {15, 15, 15}, {1.0, 1.0, 1.0});
  ScalarField rhs(g, NodeSet::interior, 0.0);
  BoundaryData he = boundary_data(g, [](double x, double, double) { return std::exp(x); });
  auto sol = solve_fourth_order(rhs, he, he, {1e-11, 1e-13, 20000});
  ScalarField exact = interior_field(g, [](double x, double, double) { return std::exp(x); });
  CHECK(rel_linf_error(sol.phi, exact) <= 5e-3);
}

TEST_CASE("fourth-order solve: constant h1 with zero h2 gives the constant") {
  GridDomain g = build_grid(2, {9, 9}, {1.0, 1.0});
  ScalarField rhs(g, NodeSet::interior, 0.0);
  auto sol = solve_fourth_order(rhs, BoundaryData(g, 4.0), BoundaryData(g, 0.0),
                                {1e-12, 1e-14, 10000});
  for (index_t i = 0; i < sol.phi.size(); ++i) {
    CHECK(sol.phi[i] == Catch::Approx(4.0).margin(1e-10));
    CHECK(sol.theta[i] == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("fourth-order manufactured solution and convergence order") {
  const double c = 3.0 * M_PI * M_PI + 9.0 * M_PI * M_PI * M_PI * M_PI;
  double err[2];
  int idx = 0;
  for (int n : {15, 31}) {
    GridDomain g = build_grid(3, {n, n, n}, {1.0, 1.0, 1.0});
    ScalarField s = sin_product(g);
    auto sol = solve_fourth_order(scaled(s, c), BoundaryData(g), BoundaryData(g),
                                  {1e-11, 1e-13, 40000});
    err[idx++] = rel_linf_error(sol.phi, s);
  }
  CHECK(err[1] <= 0.01);
  CHECK(err[0] / err[1] >= 3.5);
}

TEST_CASE("splitting consistency on random data") {
  GridDomain g = build_grid(3, {7, 7, 7}, {1.0, 1.0, 1.0});
  ScalarField rhs = testsup::random_interior_field(g, 321);
  BoundaryData h1 = boundary_data(g, [](double x, double y, double) { return x - y; });
  BoundaryData h2 = boundary_data(g, [](double x, double, double z) { return 0.5 * x * z; });
  auto sol = solve_fourth_order(rhs, h1, h2, {1e-12, 1e-14, 20000});
  EllipticOperator lap(g, OperatorKind::neg_laplacian);
  EllipticOperator helm(g, OperatorKind::helmholtz);

  // -Delta_h phi + theta ~ 0  (i.e. Delta_h phi = theta)
  ScalarField lap_phi = apply(lap, sol.phi, &h1);
  ScalarField r1 = added(lap_phi, sol.theta);
  CHECK(norm(r1, NormKind::L2) <= 1e-8 * std::max(norm(sol.theta, NormKind::L2), 1e-30));

  // (-Delta_h + I) theta + rhs ~ 0
  ScalarField r2 = added(apply(helm, sol.theta, &h2), rhs);
  CHECK(norm(r2, NormKind::L2) <= 1e-8 * norm(rhs, NormKind::L2));
}

TEST_CASE("1D eigenvalues match the discrete closed form") {
  GridDomain g = build_grid(1, {127}, {1.0});
  EigenBasis basis = eigenpairs(g, 3);
  const double h = g.spacing(0);
  for (int k = 1; k <= 3; ++k) {
    const double exact = 2.0 / (h * h) * (1.0 - std::cos(k * M_PI * h));
    CHECK(basis.lambdas[k - 1] == Catch::Approx(exact).epsilon(1e-8));
  }
  CHECK(std::abs(basis.lambdas[0] - M_PI * M_PI) / (M_PI * M_PI) <= 1e-3);
}

TEST_CASE("cube spectrum: 3 pi^2 ground value and triple second level") {
  GridDomain g = build_grid(3, {15, 15, 15}, {1.0, 1.0, 1.0});
  EigenBasis basis = eigenpairs(g, 5);
  const double h = g.spacing(0);
  auto lam1d = [&](int k) { return 2.0 / (h * h) * (1.0 - std::cos(k * M_PI * h)); };
  const double l111 = 3.0 * lam1d(1);
  const double l211 = 2.0 * lam1d(1) + lam1d(2);
  CHECK(basis.lambdas[0] == Catch::Approx(l111).epsilon(1e-7));
  for (int k = 1; k <= 3; ++k) CHECK(basis.lambdas[k] == Catch::Approx(l211).epsilon(1e-7));
  CHECK(std::abs(basis.lambdas[0] - 3 * M_PI * M_PI) / (3 * M_PI * M_PI) <= 0.01);
  CHECK(std::abs(basis.lambdas[1] - 6 * M_PI * M_PI) / (6 * M_PI * M_PI) <= 0.01);

  // monotone, orthonormal, small residuals
  for (int k = 1; k < basis.count(); ++k) CHECK(basis.lambdas[k] >= basis.lambdas[k - 1]);
  for (int i = 0; i < basis.count(); ++i)
    for (int j = 0; j < basis.count(); ++j) {
      const double gij = dot_l2(basis.vectors[i], basis.vectors[j]);
      CHECK(gij == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-10));
    }
  for (int k = 0; k < basis.count(); ++k)
    CHECK(basis.residuals[k] <= 1e-8 * basis.lambdas[k]);
}

TEST_CASE("Rayleigh quotient dominated by the first eigenvalue") {
  GridDomain g = build_grid(2, {11, 13}, {1.0, 1.0});
  EigenBasis basis = eigenpairs(g, 1);
  for (std::uint64_t s = 0; s < 6; ++s) {
    ScalarField u = testsup::random_interior_field(g, 900 + s);
    const double rq = dot_h01(u, u) / dot_l2(u, u);
    CHECK(rq >= basis.lambdas[0] * (1.0 - 1e-10));
  }
}

TEST_CASE("eigenpairs validates its arguments") {
  GridDomain g = build_grid(1, {7}, {1.0});
  CHECK_THROWS_AS(eigenpairs(g, 0), std::invalid_argument);
  CHECK_THROWS_AS(eigenpairs(g, 8), std::invalid_argument);
}
