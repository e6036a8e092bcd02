#include "bregkit/p_laplace.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "bregkit/rng.hpp"
#include "doctest.h"

using namespace bregkit;

namespace {

PLaplaceProblem problem(double p, std::function<double(double)> f) {
  return PLaplaceProblem{p, std::move(f)};
}

// tridiagonal linear finite-element oracle for -u'' = f
Vec linear_fem_oracle(const Mesh1D& mesh, const std::function<double(double)>& f) {
  const Index n = mesh.interior();
  const double h = mesh.h();
  Mat a = Mat::Zero(n, n);
  Vec b(n);
  for (Index j = 0; j < n; ++j) {
    a(j, j) = 2.0 / h;
    if (j > 0) a(j, j - 1) = -1.0 / h;
    if (j + 1 < n) a(j, j + 1) = -1.0 / h;
    b[j] = h * f((j + 1) * h);
  }
  return a.ldlt().solve(b);
}

}  // namespace

TEST_CASE("energy worked values") {
  Mesh1D m2{2};
  PLaplaceProblem p2 = problem(2.0, [](double) { return 0.0; });
  Vec hat = Vec::Constant(1, 1.0);
  CHECK(plaplace_gradient_energy(p2, m2, hat) == doctest::Approx(2.0));
  CHECK(plaplace_energy(p2, m2, Vec::Zero(1)) == doctest::Approx(0.0));

  PLaplaceProblem p4 = problem(4.0, [](double) { return 0.0; });
  CHECK(plaplace_gradient_energy(p4, m2, hat) == doctest::Approx(4.0));
}

TEST_CASE("p = 2 matches the tridiagonal oracle") {
  Mesh1D mesh{64};
  auto load = [](double x) { return std::sin(3.0 * x) + 1.0; };
  PLaplaceProblem prob = problem(2.0, load);
  GalerkinSolution sol = solve_galerkin(prob, mesh, 1e-12, 100);
  REQUIRE(sol.converged);
  Vec oracle = linear_fem_oracle(mesh, load);
  CHECK((sol.u - oracle).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("the singular-gradient regime p < 2 is rejected") {
  Mesh1D mesh{8};
  CHECK_THROWS_AS(solve_galerkin(problem(1.5, [](double) { return 1.0; }), mesh), Error);
}

TEST_CASE("zero load gives the zero solution") {
  Mesh1D mesh{16};
  GalerkinSolution sol = solve_galerkin(problem(3.0, [](double) { return 0.0; }), mesh);
  CHECK(sol.converged);
  CHECK(sol.u.lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("newton run for p = 4 converges with decreasing energy") {
  Mesh1D mesh{64};
  PLaplaceProblem prob = problem(4.0, [](double) { return 1.0; });
  GalerkinSolution sol = solve_galerkin(prob, mesh, 1e-12, 200);
  REQUIRE(sol.converged);
  CHECK(sol.grad_norm <= 1e-12);
  // p = 4 solution has lower p = 4 energy than the linear solution
  Vec linear = linear_fem_oracle(mesh, prob.load);
  CHECK(plaplace_energy(prob, mesh, sol.u) <= plaplace_energy(prob, mesh, linear) + 1e-14);
}

TEST_CASE("prolongation is the exact nested embedding") {
  Mesh1D coarse{4}, fine{16};
  SplitStream rng(8, 0);
  Vec u = rng.gaussian_vec(coarse.interior());
  Vec fine_u = prolong(u, coarse, fine);
  PLaplaceProblem prob = problem(3.0, [](double) { return 0.0; });
  // piecewise-linear embedding preserves the gradient energy exactly
  CHECK(plaplace_gradient_energy(prob, fine, fine_u) ==
        doctest::Approx(plaplace_gradient_energy(prob, coarse, u)).epsilon(1e-14));
  CHECK_THROWS_AS(prolong(u, coarse, Mesh1D{10}), Error);
}

TEST_CASE("bregman projection property across p") {
  SplitStream rng(12, 3);
  Mesh1D coarse{16}, fine{256};
  for (double p : {2.0, 3.0, 4.0}) {
    PLaplaceProblem prob = problem(p, [](double) { return 1.0; });
    GalerkinSolution uh = solve_galerkin(prob, coarse, 1e-12, 300);
    GalerkinSolution uref = solve_galerkin(prob, fine, 1e-12, 500);
    REQUIRE(uh.converged);
    REQUIRE(uref.converged);

    std::vector<Vec> candidates;
    candidates.push_back(uh.u);  // equality row
    for (int c = 0; c < 40; ++c) {
      double scale = c < 20 ? 0.05 : 0.5;
      candidates.push_back(uh.u + scale * rng.gaussian_vec(coarse.interior()));
    }
    ProjectionTable table =
        bregman_projection_check(prob, coarse, fine, uref.u, uh.u, candidates);
    CHECK(table.all_passed);
    CHECK(table.rows.size() == candidates.size() + 1);
    // the equality row sits within tolerance of the solution value
    CHECK(std::abs(table.rows[1].d_value - table.d_solution) <= 1e-14);
    CHECK(table.d_solution >= -table.tol_ref);
  }
}

TEST_CASE("p = 2 projection distance is the energy seminorm gap") {
  Mesh1D coarse{16}, fine{256};
  PLaplaceProblem prob = problem(2.0, [](double x) { return 1.0 + x; });
  GalerkinSolution uh = solve_galerkin(prob, coarse, 1e-12, 200);
  GalerkinSolution uref = solve_galerkin(prob, fine, 1e-12, 200);
  Vec w = prolong(uh.u, coarse, fine);
  // D_J^f(w, u_ref) vs 1/2 |w - u_ref|_{H^1}^2, equal up to load quadrature
  double d = plaplace_gradient_energy(prob, fine, w) -
             plaplace_gradient_energy(prob, fine, uref.u);
  Vec fvals(fine.interior());
  for (Index j = 0; j < fine.interior(); ++j) fvals[j] = prob.load((j + 1) * fine.h());
  d -= fine.h() * fvals.dot(w - uref.u);
  Vec diff = w - uref.u;
  double seminorm = plaplace_gradient_energy(prob, fine, diff);  // = 1/2 |diff|^2 for p=2
  CHECK(d == doctest::Approx(seminorm).epsilon(1e-6));
}

TEST_CASE("refinement decreases the projection distance") {
  PLaplaceProblem prob = problem(3.0, [](double) { return 1.0; });
  Mesh1D fine{512};
  GalerkinSolution uref = solve_galerkin(prob, fine, 1e-12, 400);
  double prev = std::numeric_limits<double>::infinity();
  for (int m : {8, 16, 32, 64}) {
    Mesh1D coarse{m};
    GalerkinSolution uh = solve_galerkin(prob, coarse, 1e-12, 300);
    Vec w = prolong(uh.u, coarse, fine);
    double d = plaplace_gradient_energy(prob, fine, w) -
               plaplace_gradient_energy(prob, fine, uref.u);
    Vec fvals(fine.interior());
    for (Index j = 0; j < fine.interior(); ++j) fvals[j] = prob.load((j + 1) * fine.h());
    d -= fine.h() * fvals.dot(w - uref.u);
    CHECK(d < prev);
    prev = d;
  }
}
