#pragma once

#include <vector>

#include "bregkit/functional.hpp"

namespace bregkit {

struct DiscreteMeasure {
  Vec weights;

  void validate() const {
    require(weights.size() >= 1, ErrorCode::DimensionMismatch, "empty measure");
    require((weights.array() >= 0.0).all(), ErrorCode::DomainError, "negative weight");
    require(std::abs(weights.sum() - 1.0) <= 1e-12, ErrorCode::DomainError,
            "weights must sum to one");
  }
};

// exp(-C/eps) entrywise. The solver itself never forms this (log-domain);
// exposed for reports and small-scale checks.
Mat gibbs_kernel(const Mat& cost, double eps);

struct TransportPlan {
  Mat plan;                      // full-size; dropped atoms carry zero rows/cols
  double cost = 0.0;             // <C, plan>
  double kl_objective = 0.0;     // D_E(plan, gibbs kernel)
  int iterations = 0;            // full sweeps
  double row_residual = 0.0;     // sup-norm marginal errors at exit
  double col_residual = 0.0;
  double eps = 0.0;
  std::vector<Index> kept_rows;  // surviving atom indices after dropping zeros
  std::vector<Index> kept_cols;
  std::vector<double> kl_history;    // primal KL objective after each full sweep
  std::vector<double> dual_history;  // dual objective after each full sweep;
                                     // monotone non-decreasing, same limit
};

// Alternating KL projections onto the marginal constraints, realized as
// log-domain diagonal scalings; stops when both sup-norm marginal
// residuals drop below tol. anneal_from > eps enables a halving
// epsilon ladder with warm-started potentials before the final phase
// (plain Sinkhorn equilibrates mass across near-split plan supports only
// at a 1/k rate when eps is far below the cost scale); histories cover
// the final phase.
TransportPlan sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Mat& cost,
                       double eps, double tol = 1e-9, int max_iter = 100000,
                       double anneal_from = 0.0);

struct AssignmentResult {
  double cost = 0.0;
  std::vector<Index> permutation;  // first lexicographic argmin
};

// Exhaustive assignment oracle for uniform equal-size marginals, n <= 9.
AssignmentResult exact_ot_bruteforce(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     const Mat& cost);

// C_ij = D_J(v_i, u_j) through the unique gradient at u_j; J must be
// differentiable at every u_j (SquaredL2, or BoltzmannEntropy on positive
// points).
Mat bregman_cost_matrix(const Functional& J, const std::vector<Vec>& points_u,
                        const std::vector<Vec>& points_v);

}  // namespace bregkit
