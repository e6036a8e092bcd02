#include "bregkit/inverse_scale_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bregkit {

namespace {

constexpr double kActiveTol = 1e-10;  // |p_i| = 1 detection
constexpr double kSlopeTol = 1e-13;

}  // namespace

Vec ISSTrajectory::state_at(double t) const {
  require(!breakpoints.empty(), ErrorCode::InvalidArgument, "empty trajectory");
  require(t >= 0.0, ErrorCode::InvalidArgument, "negative time");
  std::size_t k = 0;
  while (k + 1 < breakpoints.size() && breakpoints[k + 1] <= t) ++k;
  return states[k];
}

Vec ISSTrajectory::dual_at(double t) const {
  require(!breakpoints.empty(), ErrorCode::InvalidArgument, "empty trajectory");
  require(t >= 0.0, ErrorCode::InvalidArgument, "negative time");
  std::size_t k = 0;
  while (k + 1 < breakpoints.size() && breakpoints[k + 1] <= t) ++k;
  return duals[k] + (t - breakpoints[k]) * slopes[k];
}

ISSTrajectory iss_solve(const LinOp& K, const Vec& f, int max_breakpoints, double tol) {
  const Index n = K.cols();
  require(f.size() == K.rows(), ErrorCode::DimensionMismatch, "data size mismatch");

  ISSTrajectory traj;
  traj.op = K.matrix();
  traj.data = f;

  double scale = std::max(1.0, K.apply_adjoint(f).lpNorm<Eigen::Infinity>());

  double t = 0.0;
  Vec u = Vec::Zero(n);
  Vec p = Vec::Zero(n);

  auto push_state = [&](const Vec& slope, const std::vector<Index>& support) {
    traj.breakpoints.push_back(t);
    traj.states.push_back(u);
    traj.duals.push_back(p);
    traj.slopes.push_back(slope);
    traj.supports.push_back(support);
  };

  Vec slope = K.apply_adjoint(f - K.apply(u));  // -grad G(u)
  if (slope.lpNorm<Eigen::Infinity>() <= tol * scale) {
    traj.terminal = true;
    push_state(Vec::Zero(n), {});
    return traj;
  }
  push_state(slope, {});

  for (int bp = 0; bp < max_breakpoints; ++bp) {
    // next crossing |p_i + dt * s_i| = 1 over coordinates that can move
    double dt_min = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      double s = slope[i];
      if (std::abs(s) <= kSlopeTol) continue;
      double wall = s > 0.0 ? 1.0 : -1.0;
      double dt = (wall - p[i]) / s;
      if (dt <= 1e-14) continue;  // already pinned at that wall
      dt_min = std::min(dt_min, dt);
    }
    require(std::isfinite(dt_min), ErrorCode::Degenerate,
            "no future crossing although the gradient does not vanish");

    t += dt_min;
    for (Index i = 0; i < n; ++i) {
      if (u[i] != 0.0) continue;  // pinned at sign(u_i) with zero slope
      p[i] += dt_min * slope[i];
      if (std::abs(p[i]) > 1.0) {
        require(std::abs(p[i]) <= 1.0 + kActiveTol, ErrorCode::Degenerate,
                "dual left the unit ball");
        p[i] = p[i] > 0.0 ? 1.0 : -1.0;
      }
    }

    // candidate support: every coordinate at the boundary (simultaneous
    // crossings all join; the active-set solve sorts out which stay)
    SignedSupport ss;
    for (Index i = 0; i < n; ++i) {
      if (1.0 - std::abs(p[i]) <= kActiveTol) {
        p[i] = p[i] > 0.0 ? 1.0 : -1.0;  // snap exact boundary
        ss.indices.push_back(i);
        ss.signs.push_back(p[i] > 0.0 ? 1 : -1);
      }
    }
    u = sign_constrained_lsq(K, f, ss);
    slope = K.apply_adjoint(f - K.apply(u));
    for (Index i = 0; i < n; ++i)
      if (u[i] != 0.0) slope[i] = 0.0;  // stationarity on the active set, snap rounding

    push_state(slope, ss.indices);

    if (slope.lpNorm<Eigen::Infinity>() <= tol * scale) {
      traj.terminal = true;
      return traj;
    }
  }
  throw Error(ErrorCode::MaxBreakpointsExceeded,
              "trajectory did not terminate within the breakpoint budget");
}

SpectralFilter SpectralFilter::constant(double value) {
  return SpectralFilter([value](double) { return value; });
}

SpectralFilter SpectralFilter::cutoff_below(double t_cut) {
  return SpectralFilter([t_cut](double t) { return t < t_cut ? 1.0 : 0.0; });
}

SpectralFilter SpectralFilter::band(double t_lo, double t_hi) {
  return SpectralFilter([t_lo, t_hi](double t) { return (t >= t_lo && t < t_hi) ? 1.0 : 0.0; });
}

double SpectralFilter::operator()(double t) const {
  double w = w_(t);
  require(w >= 0.0 && w <= 1.0, ErrorCode::InvalidArgument, "filter weight outside [0,1]");
  return w;
}

Vec spectral_filter(const ISSTrajectory& traj, const SpectralFilter& filt) {
  require(!traj.states.empty(), ErrorCode::InvalidArgument, "empty trajectory");
  Vec out = traj.states.front();
  for (std::size_t k = 1; k < traj.states.size(); ++k)
    out += filt(traj.breakpoints[k]) * (traj.states[k] - traj.states[k - 1]);
  return out;
}

std::vector<DecayRow> decay_check(const ISSTrajectory& traj, const Vec& u_min, double grad_tol) {
  require(!traj.states.empty(), ErrorCode::InvalidArgument, "empty trajectory");
  LinOp K{traj.op};
  const Vec& f = traj.data;
  require(u_min.size() == K.cols(), ErrorCode::DimensionMismatch, "u_min size mismatch");
  double grad = K.apply_adjoint(K.apply(u_min) - f).lpNorm<Eigen::Infinity>();
  require(grad <= grad_tol * std::max(1.0, K.apply_adjoint(f).lpNorm<Eigen::Infinity>()),
          ErrorCode::NotMinimizer, "u_min does not minimize the fidelity");

  double g_min = 0.5 * (K.apply(u_min) - f).squaredNorm();
  double l1_min = u_min.lpNorm<1>();
  std::vector<DecayRow> rows;
  for (std::size_t k = 0; k < traj.breakpoints.size(); ++k) {
    double t = traj.breakpoints[k];
    if (t <= 0.0) continue;
    double lhs = 0.5 * (K.apply(traj.states[k]) - f).squaredNorm() - g_min;
    rows.push_back(DecayRow{t, lhs, l1_min / t});
  }
  return rows;
}

}  // namespace bregkit
