#pragma once

#include <functional>
#include <vector>

#include "bregkit/types.hpp"

namespace bregkit {

// Uniform P1 mesh on [0,1] with homogeneous Dirichlet conditions; a
// discrete function is the vector of its m-1 interior nodal values.
struct Mesh1D {
  int m = 2;  // element count

  double h() const { return 1.0 / m; }
  Index interior() const { return m - 1; }
  void validate() const { require(m >= 2, ErrorCode::InvalidArgument, "mesh needs m >= 2"); }
};

// E(u) = 1/p int |u'|^p - <f,u>, p >= 2; the load is an analytic function
// sampled at the nodes of whichever mesh is in play.
struct PLaplaceProblem {
  double p = 2.0;
  std::function<double(double)> load;

  void validate() const {
    require(p >= 2.0, ErrorCode::InvalidArgument, "exponent must satisfy p >= 2");
    require(static_cast<bool>(load), ErrorCode::InvalidArgument, "load function missing");
  }
};

// 1/p sum_e h |u'_e|^p; exact for P1 since the gradient is constant per
// element.
double plaplace_gradient_energy(const PLaplaceProblem& prob, const Mesh1D& mesh, const Vec& u);

// J(u) - <f,u> with trapezoidal load quadrature.
double plaplace_energy(const PLaplaceProblem& prob, const Mesh1D& mesh, const Vec& u);

struct GalerkinSolution {
  Vec u;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped (regularized) Newton with an Armijo line search; energy decreases
// across iterations and the discrete gradient norm is driven below tol.
GalerkinSolution solve_galerkin(const PLaplaceProblem& prob, const Mesh1D& mesh,
                                double tol = 1e-12, int max_iter = 200);

// P1 interpolation from a coarser nested mesh (fine.m divisible by
// coarse.m).
Vec prolong(const Vec& u_coarse, const Mesh1D& coarse, const Mesh1D& fine);

struct ProjectionRow {
  int candidate;   // -1 marks the Galerkin solution row
  double d_value;  // D_J^f(w, u_ref) on the fine mesh
  bool passed;     // d(u_h) <= d_value + tol_ref
};

struct ProjectionTable {
  double d_solution = 0.0;
  double tol_ref = 0.0;  // base tolerance + observed fine-mesh increment
  std::vector<ProjectionRow> rows;
  bool all_passed = true;
};

// Evaluates D_J^f(w, u_ref) = J(w) - J(u_ref) - <f, w - u_ref> on the fine
// mesh for the coarse solution u_h and each candidate, and checks that the
// solution attains the minimum up to tol_ref. The reference-discretization
// error enters through a solve on the half-resolution fine mesh.
ProjectionTable bregman_projection_check(const PLaplaceProblem& prob, const Mesh1D& coarse,
                                         const Mesh1D& fine, const Vec& u_ref, const Vec& u_h,
                                         const std::vector<Vec>& candidates,
                                         double base_tol = 1e-6);

}  // namespace bregkit
