#pragma once

#include <optional>
#include <vector>

#include "bregkit/variational.hpp"

namespace bregkit {

// One Bregman iteration state: p_k = K^T w_k certifies R at u_k (k >= 1);
// the k = 0 state is u_0 = 0 (a minimizer of R for every supported kind)
// with p_0 = w_0 = 0.
struct BregmanState {
  int k = 0;
  Vec u;
  Vec p;
  Vec w;
  double residual = 0.0;  // ||K u_k - f||
};

struct StoppingRule {
  enum class Kind { Discrepancy, FixedIterations };
  Kind kind;
  double delta = 0.0;  // noise-level estimate (input; never inferred)
  double tau = 1.0;    // safeguard factor, stop when ||K u - f|| <= tau * delta
  int n = 0;           // FixedIterations count

  static StoppingRule discrepancy(double delta, double tau = 1.0) {
    return StoppingRule{Kind::Discrepancy, delta, tau, 0};
  }
  static StoppingRule fixed_iterations(int n) { return StoppingRule{Kind::FixedIterations, 0.0, 1.0, n}; }
};

BregmanState bregman_initial_state(const LinOp& K, const Vec& f, const Functional& R);

// u_{k+1} = argmin 1/2 ||K u - f||^2 + alpha D_R^{p_k}(u, u_k), realized as
// the augmented-data solve with data f + alpha w_k; the dual update is
// p_{k+1} = p_k + K^T (f - K u_{k+1}) / alpha.
BregmanState bregman_step(const LinOp& K, const Vec& f, double alpha, const Functional& R,
                          const BregmanState& state, double tol = 1e-10, int max_iter = 200000);

// Same step via the explicit Bregman-distance objective (linear tilt
// alpha p_k); cross-route check against the augmented-data form.
BregmanState bregman_step_explicit(const LinOp& K, const Vec& f, double alpha, const Functional& R,
                                   const BregmanState& state, double tol = 1e-10,
                                   int max_iter = 200000);

struct BregmanRun {
  std::vector<BregmanState> history;  // states 0..k_stop
  bool converged = false;             // discrepancy met (or fixed count reached)
};

// Full history; with a Discrepancy rule the last state is the first one
// satisfying ||K u_k - f|| <= max(tau * delta, exact_tol). On budget
// exhaustion the partial history is returned with converged = false.
BregmanRun bregman_run(const LinOp& K, const Vec& f, double alpha, const Functional& R,
                       const StoppingRule& stop, int max_iter, double tol = 1e-10,
                       double exact_tol = 1e-10);

}  // namespace bregkit
