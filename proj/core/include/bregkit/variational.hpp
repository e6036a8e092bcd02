#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bregkit/functional.hpp"
#include "bregkit/linop.hpp"

namespace bregkit {

// min_u 1/2 ||K u - f||^2 + alpha R(u)
struct RegProblem {
  LinOp K;
  Vec f;
  double alpha;
  Functional R;
};

// Primal/dual bundle of a solve. By construction w = (f - K u)/alpha and
// p = K^T w; certification means p passed the subgradient test for R at u
// with kkt_residual <= tol.
struct RegSolution {
  Vec u;
  Vec p;
  Vec w;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool certified = false;
  int iterations = 0;
};

// Solver routes: closed form for SquaredL2, accelerated proximal gradient
// (restarted FISTA with an exact on-support polish) for WeightedL1,
// primal-dual first-order splitting for TV1D. Returns the best iterate
// flagged non-certified instead of throwing when max_iter runs out.
RegSolution solve(const RegProblem& prob, double tol = 1e-10, int max_iter = 200000);

// Same objective plus a linear tilt -<q, u>; the explicit route for a
// Bregman iteration step (q = alpha p_k).
RegSolution solve_tilted(const RegProblem& prob, const Vec& q, double tol = 1e-10,
                         int max_iter = 200000);

struct ErrorIdentity {
  double t_residual;  // ||K(u - u~)||^2
  double t_bregman;   // 2 alpha <p - p~, u - u~>
  double t_dual;      // alpha^2 ||w - w~||^2
  double rhs;         // ||f - f~||^2
  double residual;    // |sum of terms - rhs|
};

ErrorIdentity bregman_error_identity(const RegSolution& sol, const RegSolution& sol_tilde,
                                     const Vec& f, const Vec& f_tilde, double alpha);

struct OneSidedBounds {
  bool residual_form;  // T1 + T2 <= rhs
  bool dual_form;      // T2 + T3 <= rhs
  bool sym_bound;      // D_sym <= rhs / (2 alpha)
};

OneSidedBounds one_sided_bounds(const RegSolution& sol, const RegSolution& sol_tilde, const Vec& f,
                                const Vec& f_tilde, double alpha, double slack = 1e-9);

// u*, w*, p* with p* = K^T w* a strict-interior dual certificate for the
// l1 support of u*.
struct SourceTriple {
  Vec u_star;
  Vec w_star;
  Vec p_star;
  double margin = 0.0;  // 1 - max off-support |p*|
};

// Sparse u* on the signed support (seeded magnitudes in [1,2)), w* the
// least-norm solution of K_S^T w = signs; Infeasible when the off-support
// certificate margin falls below min_margin.
SourceTriple make_source_triple(const LinOp& K, const SignedSupport& ss, std::uint64_t seed,
                                double min_margin = 0.1);

struct RateRow {
  double delta;
  double alpha;
  double bregman_distance;  // symmetric Bregman distance to u*
  double bound;             // delta^2/alpha + alpha ||w*||^2
  double residual_norm;     // ||K u_alpha - f||
};

// Noise-level sweep for R = l1: per level, f = K u* + delta * (unit-norm
// seeded direction), solve, record distance and bound. Throws BoundViolated
// if any row exceeds its bound.
std::vector<RateRow> rate_study(const LinOp& K, const SourceTriple& triple,
                                const std::vector<double>& noise_levels,
                                const std::function<double(double)>& alpha_rule,
                                std::uint64_t seed, double tol = 1e-10, int max_iter = 200000);

}  // namespace bregkit
