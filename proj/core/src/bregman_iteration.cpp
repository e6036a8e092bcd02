#include "bregkit/bregman_iteration.hpp"

namespace bregkit {

BregmanState bregman_initial_state(const LinOp& K, const Vec& f, const Functional& R) {
  require(f.size() == K.rows(), ErrorCode::DimensionMismatch, "data size mismatch");
  require(R.kind() != FunctionalKind::BoltzmannEntropy, ErrorCode::UnsupportedFunctional,
          "Bregman iteration needs a solvable regularizer");
  BregmanState s;
  s.k = 0;
  s.u = Vec::Zero(K.cols());
  s.p = Vec::Zero(K.cols());
  s.w = Vec::Zero(K.rows());
  s.residual = f.norm();
  return s;
}

BregmanState bregman_step(const LinOp& K, const Vec& f, double alpha, const Functional& R,
                          const BregmanState& state, double tol, int max_iter) {
  Vec f_aug = f + alpha * state.w;
  RegSolution sol = solve(RegProblem{K, f_aug, alpha, R}, tol, max_iter);
  BregmanState next;
  next.k = state.k + 1;
  next.u = sol.u;
  next.w = state.w + (f - K.apply(sol.u)) / alpha;
  next.p = K.apply_adjoint(next.w);
  next.residual = (K.apply(sol.u) - f).norm();
  return next;
}

BregmanState bregman_step_explicit(const LinOp& K, const Vec& f, double alpha, const Functional& R,
                                   const BregmanState& state, double tol, int max_iter) {
  RegSolution sol = solve_tilted(RegProblem{K, f, alpha, R}, alpha * state.p, tol, max_iter);
  BregmanState next;
  next.k = state.k + 1;
  next.u = sol.u;
  next.w = state.w + (f - K.apply(sol.u)) / alpha;
  next.p = K.apply_adjoint(next.w);
  next.residual = (K.apply(sol.u) - f).norm();
  return next;
}

BregmanRun bregman_run(const LinOp& K, const Vec& f, double alpha, const Functional& R,
                       const StoppingRule& stop, int max_iter, double tol, double exact_tol) {
  BregmanRun run;
  run.history.push_back(bregman_initial_state(K, f, R));
  double stop_level = stop.kind == StoppingRule::Kind::Discrepancy
                          ? std::max(stop.tau * stop.delta, exact_tol)
                          : -1.0;
  if (stop.kind == StoppingRule::Kind::Discrepancy && run.history.back().residual <= stop_level) {
    run.converged = true;
    return run;
  }
  int budget = stop.kind == StoppingRule::Kind::FixedIterations ? stop.n : max_iter;
  for (int k = 0; k < budget; ++k) {
    run.history.push_back(bregman_step(K, f, alpha, R, run.history.back(), tol, max_iter));
    if (stop.kind == StoppingRule::Kind::Discrepancy &&
        run.history.back().residual <= stop_level) {
      run.converged = true;
      return run;
    }
  }
  run.converged = stop.kind == StoppingRule::Kind::FixedIterations;
  return run;
}

}  // namespace bregkit
