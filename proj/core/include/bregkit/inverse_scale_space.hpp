#pragma once

#include <functional>
#include <vector>

#include "bregkit/linop.hpp"

namespace bregkit {

// Exact trajectory of the inverse scale space flow
//   d/dt p(t) = -K^T (K u(t) - f),  p(t) in d||u(t)||_1,
// started at u = 0, p = 0. The primal path is piecewise constant in time
// and the dual path piecewise linear; breakpoints are the crossing times
// |p_i| = 1 solved in closed form.
struct ISSTrajectory {
  std::vector<double> breakpoints;              // t_0 = 0 < t_1 < ...
  std::vector<Vec> states;                      // u(t_k)
  std::vector<Vec> duals;                       // p(t_k)
  std::vector<Vec> slopes;                      // dp/dt on [t_k, t_{k+1})
  std::vector<std::vector<Index>> supports;     // candidate set used at t_k
  bool terminal = false;                        // u(t_n) minimizes G

  Mat op;  // problem copy, for downstream checks
  Vec data;

  Vec state_at(double t) const;  // piecewise-constant evaluation
  Vec dual_at(double t) const;   // piecewise-linear evaluation
};

ISSTrajectory iss_solve(const LinOp& K, const Vec& f, int max_breakpoints = 1000,
                        double tol = 1e-10);

// Scale weights w(t) in [0,1]; evaluation outside that range is rejected.
class SpectralFilter {
 public:
  explicit SpectralFilter(std::function<double(double)> w) : w_(std::move(w)) {}
  static SpectralFilter constant(double value);
  static SpectralFilter cutoff_below(double t_cut);  // 1 for t < t_cut, else 0
  static SpectralFilter band(double t_lo, double t_hi);

  double operator()(double t) const;

 private:
  std::function<double(double)> w_;
};

// u_0 + sum_k w(t_k) (u(t_k) - u(t_{k-1})): the atomic form of the filtered
// reconstruction, over the recorded jumps only.
Vec spectral_filter(const ISSTrajectory& traj, const SpectralFilter& filt);

struct DecayRow {
  double t;
  double lhs;  // G(u(t_k)) - G(u_min)
  double rhs;  // ||u_min||_1 / t_k
};

// Verifies G(u(t_k)) - G(u_min) <= ||u_min||_1 / t_k at every positive
// breakpoint. u_min must satisfy ||grad G(u_min)||_inf <= grad_tol.
std::vector<DecayRow> decay_check(const ISSTrajectory& traj, const Vec& u_min,
                                  double grad_tol = 1e-8);

}  // namespace bregkit
