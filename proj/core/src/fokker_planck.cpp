#include "bregkit/fokker_planck.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace bregkit {

namespace {

// Bernoulli function x / (e^x - 1), series near zero.
double bernoulli_fn(double x) {
  if (std::abs(x) < 1e-5) return 1.0 - 0.5 * x + x * x / 12.0;
  return x / std::expm1(x);
}

// Divergence operator M of the Scharfetter-Gummel fluxes: (M u)_i =
// (flux_{i+1/2} - flux_{i-1/2}) / h with
//   flux_{i+1/2} = (B(F h) u_i - B(-F h) u_{i+1}) / h.
// Column sums vanish, so I + dt M conserves mass exactly.
Mat flux_divergence(const FPProblem& prob) {
  const int n = prob.grid.cells;
  const double h = prob.grid.h();
  Mat m = Mat::Zero(n, n);
  auto add_face = [&](int left, int right, double force) {
    double x = force * h;
    double bl = bernoulli_fn(x);    // multiplies u_left
    double br = bernoulli_fn(-x);   // multiplies u_right
    // flux contributes + to div(left is upstream cell i) ... div_i += flux, div_{i+1} -= flux
    m(left, left) += bl / (h * h);
    m(left, right) -= br / (h * h);
    m(right, left) -= bl / (h * h);
    m(right, right) += br / (h * h);
  };
  if (prob.grid.topology == Topology::Periodic) {
    for (int i = 0; i < n; ++i) add_face(i, (i + 1) % n, prob.face_force[i]);
  } else {
    for (int i = 0; i < n - 1; ++i) add_face(i, i + 1, prob.face_force[i]);
  }
  return m;
}

}  // namespace

void Grid1D::validate() const {
  require(length > 0.0, ErrorCode::InvalidArgument, "grid length must be positive");
  require(cells >= 4, ErrorCode::InvalidArgument, "grid needs at least 4 cells");
}

void GridFunction::validate(bool positive) const {
  grid.validate();
  require(values.size() == grid.cells, ErrorCode::DimensionMismatch, "cell count mismatch");
  require(all_finite(values), ErrorCode::DomainError, "non-finite density");
  if (positive)
    require((values.array() > 0.0).all(), ErrorCode::NegativeDensity, "density must be positive");
  else
    require((values.array() >= 0.0).all(), ErrorCode::NegativeDensity,
            "density must be nonnegative");
}

void FPProblem::validate() const {
  grid.validate();
  require(face_force.size() == grid.faces(), ErrorCode::DimensionMismatch,
          "face force count mismatch");
  require(all_finite(face_force), ErrorCode::DomainError, "non-finite force");
}

FPProblem FPProblem::constant_force(const Grid1D& grid, double c) {
  grid.validate();
  return FPProblem{grid, Vec::Constant(grid.faces(), c)};
}

FPProblem FPProblem::from_potential(const Grid1D& grid,
                                    const std::vector<double>& node_potential) {
  grid.validate();
  const double h = grid.h();
  const int nf = grid.faces();
  require(static_cast<int>(node_potential.size()) == grid.cells, ErrorCode::DimensionMismatch,
          "potential is sampled at cell centers");
  Vec force(nf);
  for (int i = 0; i < nf; ++i) {
    int right = grid.topology == Topology::Periodic ? (i + 1) % grid.cells : i + 1;
    force[i] = (node_potential[right] - node_potential[i]) / h;
  }
  return FPProblem{grid, force};
}

GridFunction steady_state(const FPProblem& prob) {
  prob.validate();
  const int n = prob.grid.cells;
  Mat m = flux_divergence(prob);
  // stack the mass constraint on top of the singular stationary system
  Mat sys(n + 1, n);
  sys.topRows(n) = m;
  sys.row(n) = Vec::Constant(n, prob.grid.h()).transpose();
  Vec rhs = Vec::Zero(n + 1);
  rhs[n] = 1.0;
  Eigen::ColPivHouseholderQR<Mat> qr(sys);
  require(qr.rank() == n, ErrorCode::SingularSystem, "stationary system is rank deficient");
  Vec u = qr.solve(rhs);
  GridFunction out{prob.grid, u};
  require((u.array() > 0.0).all(), ErrorCode::SingularSystem,
          "stationary solution not strictly positive");
  return out;
}

std::vector<GridFunction> evolve(const FPProblem& prob, const GridFunction& u0, double dt,
                                 double T) {
  prob.validate();
  u0.validate(true);
  require(u0.grid.cells == prob.grid.cells && u0.grid.topology == prob.grid.topology,
          ErrorCode::DimensionMismatch, "initial state lives on a different grid");
  require(dt > 0.0 && T >= 0.0, ErrorCode::InvalidArgument, "need dt > 0 and T >= 0");
  require(std::abs(u0.mass() - 1.0) <= 1e-9, ErrorCode::DomainError,
          "initial density must have unit mass");

  const int n = prob.grid.cells;
  const int steps = static_cast<int>(std::llround(T / dt));
  Mat a = Mat::Identity(n, n) + dt * flux_divergence(prob);
  Eigen::PartialPivLU<Mat> lu(a);

  std::vector<GridFunction> states;
  states.reserve(steps + 1);
  states.push_back(u0);
  Vec u = u0.values;
  for (int s = 0; s < steps; ++s) {
    u = lu.solve(u);
    require(all_finite(u), ErrorCode::StepFailure, "implicit step produced non-finite values");
    require((u.array() > 0.0).all(), ErrorCode::NegativeDensity,
            "implicit step lost positivity");
    states.push_back(GridFunction{prob.grid, u});
  }
  return states;
}

double relative_entropy(const GridFunction& u, const GridFunction& u_inf) {
  u.validate(false);
  u_inf.validate(false);
  require(u.grid.cells == u_inf.grid.cells, ErrorCode::DimensionMismatch, "grid mismatch");
  require((u_inf.values.array() > 0.0).all(), ErrorCode::DomainError,
          "reference density must be strictly positive");
  double s = 0.0;
  for (int i = 0; i < u.grid.cells; ++i) {
    double a = u.values[i], b = u_inf.values[i];
    s += (a > 0.0 ? a * std::log(a / b) : 0.0) + b - a;
  }
  return u.grid.h() * s;
}

DissipationReport dissipation_report(const std::vector<GridFunction>& states,
                                     const GridFunction& u_inf, double dt, double mono_tol) {
  require(!states.empty(), ErrorCode::InvalidArgument, "no states");
  DissipationReport rep;
  std::vector<double> d(states.size());
  for (std::size_t m = 0; m < states.size(); ++m) d[m] = relative_entropy(states[m], u_inf);
  for (std::size_t m = 0; m + 1 < states.size(); ++m) {
    require(d[m + 1] <= d[m] + mono_tol * std::max(1.0, d[m]), ErrorCode::MonotonicityViolation,
            "entropy increased at step " + std::to_string(m));
  }
  for (std::size_t m = 0; m < states.size(); ++m) {
    double diss = m + 1 < states.size() ? (d[m] - d[m + 1]) / dt : 0.0;
    rep.rows.push_back(DissipationRow{static_cast<double>(m) * dt, d[m], diss});
  }

  // least-squares fit of log D over the trailing half of the rows that sit
  // safely above rounding
  double floor = std::max(1e-300, 1e-13 * std::max(1.0, d[0]));
  std::size_t usable = 0;
  while (usable < d.size() && d[usable] > floor) ++usable;
  std::size_t start = usable / 2;
  if (usable - start >= 3) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t cnt = usable - start;
    for (std::size_t m = start; m < usable; ++m) {
      double tm = static_cast<double>(m) * dt;
      double ym = std::log(d[m]);
      st += tm;
      sy += ym;
      stt += tm * tm;
      sty += tm * ym;
    }
    double denom = static_cast<double>(cnt) * stt - st * st;
    if (denom > 0.0) {
      double slope = (static_cast<double>(cnt) * sty - st * sy) / denom;
      rep.tail_rate = -slope;
      rep.fit_start = static_cast<double>(start) * dt;
      rep.fit_points = static_cast<int>(cnt);
    }
  }
  return rep;
}

}  // namespace bregkit
