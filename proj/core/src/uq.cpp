#include "bregkit/uq.hpp"

#include <cmath>

#include "bregkit/rng.hpp"
#include "bregkit/threading.hpp"

namespace bregkit {

SampleResult sample_solve(const LinOp& K, const SourceTriple& triple, const NoiseModel& noise,
                          double alpha, std::uint64_t sample_index, double tol, int max_iter) {
  noise.validate();
  require(alpha > 0.0, ErrorCode::InvalidArgument, "alpha must be positive");
  const double s2 = noise.sigma * noise.sigma;

  SplitStream rng(noise.seed, sample_index);
  Vec eta = noise.sigma * rng.gaussian_vec(K.rows());
  Vec f = K.apply(triple.u_star) + eta;

  // 1/(2 s2) ||Ku-f||^2 + alpha R  ==  1/2 ||Ku-f||^2 + (alpha s2) R
  Functional r = Functional::weighted_l1(Vec::Ones(K.cols()));
  RegSolution sol = solve(RegProblem{K, f, alpha * s2, r}, tol, max_iter);
  require(sol.certified, ErrorCode::NotCertified, "sample solve missed the KKT tolerance");

  Vec w_alpha = sol.w;  // (f - K u)/ (alpha s2): the dual scaling of this fidelity
  SampleResult out;
  out.d_sym = (sol.p - triple.p_star).dot(sol.u - triple.u_star);
  out.t1 = (K.apply(sol.u - triple.u_star)).squaredNorm();
  out.t3 = alpha * alpha * s2 * s2 * (w_alpha - triple.w_star).squaredNorm();
  out.rhs = (eta - alpha * s2 * triple.w_star).squaredNorm();
  return out;
}

double optimal_alpha(const LinOp& K, const SourceTriple& triple, double sigma) {
  double wn2 = triple.w_star.squaredNorm();
  require(wn2 > 0.0 && sigma > 0.0, ErrorCode::InvalidArgument, "degenerate bound");
  return std::sqrt(static_cast<double>(K.rows()) / (sigma * sigma * wn2));
}

MCReport expected_bound_check(const LinOp& K, const SourceTriple& triple, const NoiseModel& noise,
                              double alpha, int n_samples, double tol, int max_iter) {
  noise.validate();
  require(n_samples >= 100, ErrorCode::InvalidArgument, "need at least 100 samples");
  const double s2 = noise.sigma * noise.sigma;
  const int m = static_cast<int>(K.rows());

  Vec d(n_samples), lhs(n_samples);
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
    SampleResult r = sample_solve(K, triple, noise, alpha, i, tol, max_iter);
    // per-sample squared-norm identity, algebraic up to solver rounding
    double l = r.t1 + 2.0 * alpha * s2 * r.d_sym + r.t3;
    require(std::abs(l - r.rhs) <= 1e-6 * (1.0 + r.rhs), ErrorCode::BoundViolated,
            "per-sample three-term identity failed");
    d[static_cast<Index>(i)] = r.d_sym;
    lhs[static_cast<Index>(i)] = l;
  });

  MCReport rep;
  rep.seed = noise.seed;
  rep.samples = n_samples;
  rep.sigma = noise.sigma;
  rep.alpha = alpha;
  rep.m = m;

  double n = static_cast<double>(n_samples);
  rep.mean_bregman = pairwise_sum(d) / n;
  double var = pairwise_sum(Vec((d.array() - rep.mean_bregman).square())) / (n - 1.0);
  rep.ci_halfwidth = 1.96 * std::sqrt(var / n);
  rep.bound = m / (2.0 * alpha) + 0.5 * alpha * s2 * triple.w_star.squaredNorm();

  rep.three_term_lhs_mean = pairwise_sum(lhs) / n;
  double lvar = pairwise_sum(Vec((lhs.array() - rep.three_term_lhs_mean).square())) / (n - 1.0);
  rep.three_term_se = std::sqrt(lvar / n);
  rep.three_term_rhs =
      s2 * m + alpha * alpha * s2 * s2 * triple.w_star.squaredNorm();

  bool bound_ok = rep.mean_bregman - rep.ci_halfwidth <= rep.bound;
  bool identity_ok =
      std::abs(rep.three_term_lhs_mean - rep.three_term_rhs) <= 4.0 * rep.three_term_se;
  rep.pass = bound_ok && identity_ok;
  return rep;
}

}  // namespace bregkit
