#include "bregkit/variational.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

#include "bregkit/rng.hpp"

namespace bregkit {

namespace {

// Subgradient test residual for p vs dR(u): feasibility in dom R* plus the
// scaled Fenchel-Young gap. Zero exactly at KKT points.
double kkt_residual_for(const Functional& R, const Vec& u, const Vec& p) {
  switch (R.kind()) {
    case FunctionalKind::SquaredL2:
      return (p - u).lpNorm<Eigen::Infinity>() / (1.0 + u.lpNorm<Eigen::Infinity>());
    case FunctionalKind::WeightedL1: {
      const Vec& w = R.weights();
      double feas = 0.0;
      for (Index i = 0; i < p.size(); ++i)
        feas = std::max(feas, (std::abs(p[i]) - w[i]) / std::max(1.0, w[i]));
      double r = R.eval(u);
      double gap = std::abs(r - p.dot(u)) / (1.0 + r);
      return std::max(std::max(feas, 0.0), gap);
    }
    case FunctionalKind::TV1D: {
      const Index n = p.size();
      double run = 0.0, feas = 0.0;
      for (Index i = 0; i + 1 < n; ++i) {
        run += p[i];
        feas = std::max(feas, std::abs(run) - 1.0);
      }
      run += p[n - 1];
      feas = std::max(feas, std::abs(run) / std::max(1.0, p.lpNorm<1>()));
      double r = R.eval(u);
      double gap = std::abs(r - p.dot(u)) / (1.0 + r);
      return std::max(feas, gap);
    }
    case FunctionalKind::BoltzmannEntropy:
      break;
  }
  throw Error(ErrorCode::UnsupportedFunctional, "no KKT test for this regularizer");
}

RegSolution finish(const RegProblem& prob, const Vec& q, Vec u, int iters, double tol) {
  RegSolution sol;
  sol.u = std::move(u);
  sol.w = (prob.f - prob.K.apply(sol.u)) / prob.alpha;
  sol.p = prob.K.apply_adjoint(sol.w) + q / prob.alpha;
  sol.objective =
      0.5 * (prob.K.apply(sol.u) - prob.f).squaredNorm() + prob.alpha * prob.R.eval(sol.u) -
      q.dot(sol.u);
  sol.kkt_residual = kkt_residual_for(prob.R, sol.u, sol.p);
  sol.certified = sol.kkt_residual <= tol;
  sol.iterations = iters;
  return sol;
}

RegSolution solve_squared_l2(const RegProblem& prob, const Vec& q, double tol) {
  const Mat& k = prob.K.matrix();
  Mat a = k.transpose() * k;
  a.diagonal().array() += prob.alpha;
  Vec rhs = k.transpose() * prob.f + q;
  Vec u = Eigen::LDLT<Mat>(a).solve(rhs);
  return finish(prob, q, std::move(u), 1, tol);
}

Vec soft_threshold(const Vec& x, const Vec& t) {
  Vec u(x.size());
  for (Index i = 0; i < x.size(); ++i)
    u[i] = x[i] > t[i] ? x[i] - t[i] : (x[i] < -t[i] ? x[i] + t[i] : 0.0);
  return u;
}

// Exact stationarity solve on the support detected by FISTA. Returns true
// and fills `out` only when the candidate passes signs, feasibility and the
// KKT test at tol.
bool polish_l1(const RegProblem& prob, const Vec& q, const Vec& x, double tol, RegSolution* out) {
  const Mat& k = prob.K.matrix();
  const Vec& w = prob.R.weights();
  std::vector<Index> support;
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) support.push_back(i);

  Vec u = Vec::Zero(x.size());
  if (!support.empty()) {
    Mat ks(k.rows(), static_cast<Index>(support.size()));
    Vec rhs(static_cast<Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) {
      Index i = support[j];
      ks.col(static_cast<Index>(j)) = k.col(i);
      double sign = x[i] > 0.0 ? 1.0 : -1.0;
      rhs[static_cast<Index>(j)] = (k.col(i).dot(prob.f)) + q[i] - prob.alpha * w[i] * sign;
    }
    Mat gram = ks.transpose() * ks;
    Eigen::LDLT<Mat> ldlt(gram);
    if (ldlt.info() != Eigen::Success) return false;
    Vec us = ldlt.solve(rhs);
    for (std::size_t j = 0; j < support.size(); ++j) {
      double sign = x[support[j]] > 0.0 ? 1.0 : -1.0;
      if (us[static_cast<Index>(j)] * sign <= 0.0) return false;  // support guess was wrong
      u[support[j]] = us[static_cast<Index>(j)];
    }
  }
  RegSolution cand = finish(prob, q, std::move(u), 0, tol);
  if (!cand.certified) return false;
  *out = std::move(cand);
  return true;
}

RegSolution solve_weighted_l1(const RegProblem& prob, const Vec& q, double tol, int max_iter) {
  const Index n = prob.K.cols();
  double lip = prob.K.op_norm_sq() * (1.0 + 1e-6);
  require(lip > 0.0, ErrorCode::InvalidArgument, "zero operator");
  Vec thresh = (prob.alpha / lip) * prob.R.weights();

  Vec x = Vec::Zero(n), x_prev = Vec::Zero(n), y = Vec::Zero(n);
  double t = 1.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vec grad = prob.K.apply_adjoint(prob.K.apply(y) - prob.f) - q;
    Vec x_new = soft_threshold(y - grad / lip, thresh);
    // adaptive restart keeps the momentum from overshooting
    if ((y - x_new).dot(x_new - x_prev) > 0.0) t = 1.0;
    double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_new + ((t - 1.0) / t_new) * (x_new - x_prev);
    t = t_new;
    x_prev = x;
    x = x_new;

    if (it % 10 == 0 || it == max_iter) {
      RegSolution probe = finish(prob, q, x, it, tol);
      if (probe.certified) return probe;
      if (it % 50 == 0) {
        RegSolution polished;
        if (polish_l1(prob, q, x, tol, &polished)) {
          polished.iterations = it;
          return polished;
        }
      }
    }
  }
  return finish(prob, q, x, max_iter, tol);
}

RegSolution solve_tv(const RegProblem& prob, const Vec& q, double tol, int max_iter) {
  const Index n = prob.K.cols();
  const Mat& k = prob.K.matrix();
  // PDHG with the quadratic handled by its exact prox
  double tau = 0.49, sigma = 0.49;  // tau*sigma*||D||^2 < 1, ||D||^2 <= 4
  Mat a = Mat::Identity(n, n) + tau * (k.transpose() * k).eval();
  Eigen::LDLT<Mat> ldlt(a);
  Vec ktf = k.transpose() * prob.f + q;

  Vec u = Vec::Zero(n), u_bar = Vec::Zero(n);
  Vec phi = Vec::Zero(n - 1);
  for (int it = 1; it <= max_iter; ++it) {
    for (Index e = 0; e < n - 1; ++e) {
      double v = phi[e] + sigma * (u_bar[e + 1] - u_bar[e]);
      phi[e] = std::clamp(v, -prob.alpha, prob.alpha);
    }
    Vec dtphi = Vec::Zero(n);
    for (Index e = 0; e < n - 1; ++e) {
      dtphi[e] -= phi[e];
      dtphi[e + 1] += phi[e];
    }
    Vec u_new = ldlt.solve(u - tau * dtphi + tau * ktf);
    u_bar = 2.0 * u_new - u;
    u = u_new;

    if (it % 20 == 0 || it == max_iter) {
      RegSolution probe = finish(prob, q, u, it, tol);
      if (probe.certified) return probe;
    }
  }
  return finish(prob, q, u, max_iter, tol);
}

}  // namespace

RegSolution solve_tilted(const RegProblem& prob, const Vec& q, double tol, int max_iter) {
  require(prob.alpha > 0.0, ErrorCode::InvalidArgument, "alpha must be positive");
  require(prob.f.size() == prob.K.rows(), ErrorCode::DimensionMismatch, "data size mismatch");
  require(q.size() == prob.K.cols(), ErrorCode::DimensionMismatch, "tilt size mismatch");
  switch (prob.R.kind()) {
    case FunctionalKind::SquaredL2:
      return solve_squared_l2(prob, q, tol);
    case FunctionalKind::WeightedL1:
      return solve_weighted_l1(prob, q, tol, max_iter);
    case FunctionalKind::TV1D:
      return solve_tv(prob, q, tol, max_iter);
    case FunctionalKind::BoltzmannEntropy:
      break;
  }
  throw Error(ErrorCode::UnsupportedFunctional, "solve supports SquaredL2, WeightedL1, TV1D");
}

RegSolution solve(const RegProblem& prob, double tol, int max_iter) {
  return solve_tilted(prob, Vec::Zero(prob.K.cols()), tol, max_iter);
}

ErrorIdentity bregman_error_identity(const RegSolution& sol, const RegSolution& sol_tilde,
                                     const Vec& f, const Vec& f_tilde, double alpha) {
  require(sol.certified && sol_tilde.certified, ErrorCode::NotCertified,
          "both solutions must carry a KKT certificate");
  Vec df = f - f_tilde;
  Vec dw = sol.w - sol_tilde.w;
  // K(u - u~) = (f - f~) - alpha (w - w~) without needing K
  Vec ku = df - alpha * dw;
  ErrorIdentity out;
  out.t_residual = ku.squaredNorm();
  out.t_bregman = 2.0 * alpha * (sol.p - sol_tilde.p).dot(sol.u - sol_tilde.u);
  out.t_dual = alpha * alpha * dw.squaredNorm();
  out.rhs = df.squaredNorm();
  out.residual = std::abs(out.t_residual + out.t_bregman + out.t_dual - out.rhs);
  return out;
}

OneSidedBounds one_sided_bounds(const RegSolution& sol, const RegSolution& sol_tilde, const Vec& f,
                                const Vec& f_tilde, double alpha, double slack) {
  ErrorIdentity id = bregman_error_identity(sol, sol_tilde, f, f_tilde, alpha);
  double tol = slack * (1.0 + id.rhs);
  OneSidedBounds b;
  b.residual_form = id.t_residual + id.t_bregman <= id.rhs + tol;
  b.dual_form = id.t_bregman + id.t_dual <= id.rhs + tol;
  double d_sym = id.t_bregman / (2.0 * alpha);
  b.sym_bound = d_sym <= id.rhs / (2.0 * alpha) + tol;
  return b;
}

SourceTriple make_source_triple(const LinOp& K, const SignedSupport& ss, std::uint64_t seed,
                                double min_margin) {
  const Index n = K.cols();
  ss.validate(n);
  require(!ss.indices.empty(), ErrorCode::EmptySupport, "source support is empty");

  SplitStream rng(seed, 0);
  Vec u_star = Vec::Zero(n);
  for (std::size_t j = 0; j < ss.indices.size(); ++j)
    u_star[ss.indices[j]] = static_cast<double>(ss.signs[j]) * (1.0 + rng.uniform());

  Mat ks(K.rows(), static_cast<Index>(ss.indices.size()));
  Vec sg(static_cast<Index>(ss.indices.size()));
  for (std::size_t j = 0; j < ss.indices.size(); ++j) {
    ks.col(static_cast<Index>(j)) = K.matrix().col(ss.indices[j]);
    sg[static_cast<Index>(j)] = static_cast<double>(ss.signs[j]);
  }
  // least-norm w with K_S^T w = signs
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(ks.transpose());
  require(cod.rank() == ks.cols(), ErrorCode::RankDeficient,
          "restricted columns are rank deficient");
  Vec w_star = cod.solve(sg);
  Vec p_star = K.apply_adjoint(w_star);

  double worst = 0.0;
  for (Index i = 0; i < n; ++i) {
    bool on_support = false;
    for (Index j : ss.indices)
      if (j == i) on_support = true;
    if (!on_support) worst = std::max(worst, std::abs(p_star[i]));
  }
  double margin = 1.0 - worst;
  require(margin >= min_margin, ErrorCode::Infeasible,
          "dual certificate margin " + std::to_string(margin) + " below requested " +
              std::to_string(min_margin));
  return SourceTriple{std::move(u_star), std::move(w_star), std::move(p_star), margin};
}

std::vector<RateRow> rate_study(const LinOp& K, const SourceTriple& triple,
                                const std::vector<double>& noise_levels,
                                const std::function<double(double)>& alpha_rule,
                                std::uint64_t seed, double tol, int max_iter) {
  Functional r = Functional::weighted_l1(Vec::Ones(K.cols()));
  Vec ku_star = K.apply(triple.u_star);
  std::vector<RateRow> rows;
  rows.reserve(noise_levels.size());
  for (std::size_t row = 0; row < noise_levels.size(); ++row) {
    double delta = noise_levels[row];
    double alpha = alpha_rule(delta);
    require(alpha > 0.0, ErrorCode::InvalidArgument, "alpha rule must return a positive value");
    Vec f = ku_star;
    if (delta > 0.0) {
      SplitStream rng(seed, row + 1);
      Vec dir = rng.gaussian_vec(K.rows());
      f += delta * (dir / dir.norm());
    }
    RegSolution sol = solve(RegProblem{K, f, alpha, r}, tol, max_iter);
    double d_sym = (sol.p - triple.p_star).dot(sol.u - triple.u_star);
    double bound = delta * delta / alpha + alpha * triple.w_star.squaredNorm();
    double res = (K.apply(sol.u) - f).norm();
    require(d_sym <= bound + 1e-9 * (1.0 + bound), ErrorCode::BoundViolated,
            "rate bound violated at delta " + std::to_string(delta));
    rows.push_back(RateRow{delta, alpha, d_sym, bound, res});
  }
  return rows;
}

}  // namespace bregkit
