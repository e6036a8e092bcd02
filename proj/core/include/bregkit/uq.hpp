#pragma once

#include <cstdint>

#include "bregkit/variational.hpp"

namespace bregkit {

struct NoiseModel {
  double sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    require(sigma > 0.0, ErrorCode::InvalidArgument, "sigma must be positive");
  }
};

// One draw of f = K u* + eta, Cov(eta) = sigma^2 I, solved with the scaled
// fidelity 1/(2 sigma^2) ||K u - f||^2 + alpha ||u||_1. Carries the three
// squared-norm identity pieces:
//   t1 + 2 alpha sigma^2 d_sym + t3 = rhs,  rhs = ||eta - alpha sigma^2 w*||^2.
struct SampleResult {
  double d_sym;  // symmetric Bregman distance to (u*, p*)
  double t1;     // ||K (u_alpha - u*)||^2
  double t3;     // alpha^2 sigma^4 ||w_alpha - w*||^2
  double rhs;
};

SampleResult sample_solve(const LinOp& K, const SourceTriple& triple, const NoiseModel& noise,
                          double alpha, std::uint64_t sample_index, double tol = 1e-10,
                          int max_iter = 200000);

struct MCReport {
  std::uint64_t seed = 0;
  int samples = 0;
  double sigma = 0.0;
  double alpha = 0.0;
  int m = 0;                      // data dimension
  double mean_bregman = 0.0;      // sample mean of d_sym
  double ci_halfwidth = 0.0;      // 1.96 * sd / sqrt(n)
  double bound = 0.0;             // M/(2 alpha) + alpha sigma^2 ||w*||^2 / 2
  double three_term_lhs_mean = 0.0;
  double three_term_rhs = 0.0;    // sigma^2 M + alpha^2 sigma^4 ||w*||^2
  double three_term_se = 0.0;     // standard error of the lhs mean
  bool pass = false;
};

// alpha minimizing the expected bound: sqrt(M / (sigma^2 ||w*||^2)).
double optimal_alpha(const LinOp& K, const SourceTriple& triple, double sigma);

// Seeded Monte-Carlo check of the expected Bregman bound; samples run in
// parallel and aggregate pairwise, so the report replays bit-identically
// for a fixed (seed, n_samples, problem).
MCReport expected_bound_check(const LinOp& K, const SourceTriple& triple, const NoiseModel& noise,
                              double alpha, int n_samples, double tol = 1e-10,
                              int max_iter = 200000);

}  // namespace bregkit
