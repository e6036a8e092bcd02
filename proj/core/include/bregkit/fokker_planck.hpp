#pragma once

#include <vector>

#include "bregkit/types.hpp"

namespace bregkit {

enum class Topology { Periodic, NoFlux };

struct Grid1D {
  double length = 1.0;
  int cells = 4;
  Topology topology = Topology::Periodic;

  double h() const { return length / cells; }
  // periodic: one face per cell; interval: interior faces only (boundary
  // fluxes vanish by the no-flux condition)
  int faces() const { return topology == Topology::Periodic ? cells : cells - 1; }
  void validate() const;
};

// Nonnegative cell-averaged density.
struct GridFunction {
  Grid1D grid;
  Vec values;

  double mass() const { return values.sum() * grid.h(); }
  void validate(bool positive = false) const;
};

// d/dt u = d/dx (d/dx u + u F) with unit diffusion; F sampled at faces.
struct FPProblem {
  Grid1D grid;
  Vec face_force;

  void validate() const;
  static FPProblem constant_force(const Grid1D& grid, double c);
  // F = V' realized through potential differences across faces, so the
  // discrete steady state is the exact Gibbs density of the sampled V
  static FPProblem from_potential(const Grid1D& grid, const std::vector<double>& node_potential);
};

// Mass-one strictly positive solution of the discrete stationary system.
GridFunction steady_state(const FPProblem& prob);

// Implicit Euler on the exponential-fitting (Scharfetter-Gummel) finite
// volume scheme; conserves mass to rounding and preserves positivity.
// Returns states at t = 0, dt, ..., n*dt with n = round(T/dt).
std::vector<GridFunction> evolve(const FPProblem& prob, const GridFunction& u0, double dt,
                                 double T);

// h * sum_i (u_i log(u_i/uinf_i) + uinf_i - u_i); the Boltzmann-entropy
// Bregman distance with the cell quadrature weight.
double relative_entropy(const GridFunction& u, const GridFunction& u_inf);

struct DissipationRow {
  double t;
  double entropy;      // D_E(u(t), u_inf)
  double dissipation;  // -(D(t+dt) - D(t))/dt, 0 on the last row
};

struct DissipationReport {
  std::vector<DissipationRow> rows;
  double tail_rate = 0.0;   // exponential decay rate fitted on the tail
  double fit_start = 0.0;   // first t used in the fit
  int fit_points = 0;
};

// Tabulates the entropy along a trajectory, enforces monotone decay
// (MonotonicityViolation on the offending step) and fits log D vs t on the
// trailing half of the usable rows.
DissipationReport dissipation_report(const std::vector<GridFunction>& states,
                                     const GridFunction& u_inf, double dt,
                                     double mono_tol = 1e-12);

}  // namespace bregkit
