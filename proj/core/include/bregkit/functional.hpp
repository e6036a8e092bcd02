#pragma once

#include <optional>
#include <vector>

#include "bregkit/types.hpp"

namespace bregkit {

// Convex functionals with evaluation, deterministic subgradient selection,
// closed-form convex conjugate, and proximal map.
//
//   SquaredL2        J(u) = 1/2 ||u||^2
//   WeightedL1       J(u) = sum_i w_i |u_i|,  w_i > 0
//   BoltzmannEntropy J(u) = sum_i u_i log u_i + 1 - u_i  on u >= 0, 0 log 0 = 0
//   TV1D             J(u) = sum_i |u_{i+1} - u_i|  (grid spacing h cancels in
//                    the standard first-order quadrature and is kept only as
//                    metadata for grid-aware callers)
enum class FunctionalKind { SquaredL2, WeightedL1, BoltzmannEntropy, TV1D };

class Functional {
 public:
  static Functional squared_l2();
  static Functional weighted_l1(Vec weights);
  static Functional boltzmann_entropy();
  static Functional tv_1d(double grid_spacing);

  FunctionalKind kind() const { return kind_; }
  const Vec& weights() const { return weights_; }
  double grid_spacing() const { return grid_spacing_; }

  bool one_homogeneous() const {
    return kind_ == FunctionalKind::WeightedL1 || kind_ == FunctionalKind::TV1D;
  }
  bool separable() const { return kind_ != FunctionalKind::TV1D; }

  bool in_domain(const Vec& u) const;
  double eval(const Vec& u) const;

  // Deterministic selection within the subdifferential:
  //   SquaredL2        p = u
  //   WeightedL1       p_i = w_i sign(u_i), zero entries map to 0
  //   BoltzmannEntropy p_i = log u_i (NotDifferentiable at u_i = 0)
  //   TV1D             p = D^T sign(Du), zero differences map to 0
  Vec subgradient(const Vec& u) const;

  // J*(p); +infinity when p is outside dom J* (indicator conjugates of the
  // one-homogeneous kinds use a small feasibility tolerance).
  double conjugate(const Vec& p) const;

  // argmin_u tau J(u) + 1/2 ||u - f||^2
  Vec prox(const Vec& f, double tau) const;

 private:
  Functional(FunctionalKind kind, Vec weights, double grid_spacing)
      : kind_(kind), weights_(std::move(weights)), grid_spacing_(grid_spacing) {}

  FunctionalKind kind_;
  Vec weights_;        // WeightedL1 only
  double grid_spacing_ = 1.0;  // TV1D only
};

// Exact 1D total variation prox (direct non-iterative algorithm); exposed
// for cross-checks against the primal-dual route.
Vec prox_tv1d(const Vec& y, double lambda);

// A point u with a subgradient p certified by the Fenchel-Young gap test
//   J(u) + J*(p) - <p,u> <= tol * (1 + |J(u)|).
struct SubgradientPair {
  Vec u;
  Vec p;
};

inline constexpr double kCertTol = 1e-10;

// J(u) + J*(p) - <p,u>; +infinity when p is infeasible for J*.
double duality_gap(const Functional& J, const Vec& u, const Vec& p);

// Throws CertError when the gap test fails.
SubgradientPair certify(const Functional& J, Vec u, Vec p, double tol = kCertTol);

// subgradient selection + certificate in one step
SubgradientPair select_pair(const Functional& J, const Vec& u);

// D_J^p(v,u) = J(v) - J(u) - <p, v-u> for p in dJ(u).
double bregman(const Functional& J, const Vec& v, const SubgradientPair& pair,
               double cert_tol = kCertTol);

// <p - q, u - v> = D_J^p(v,u) + D_J^q(u,v).
double symmetric_bregman(const Functional& J, const SubgradientPair& pair_u,
                         const SubgradientPair& pair_v, double cert_tol = kCertTol);

// |D_J^p(v,u) - D_{J*}^v(p,q)| with D_{J*}^v(p,q) = J*(p) - J*(q) - <v, p-q>.
double dual_bregman_residual(const Functional& J, const SubgradientPair& pair_u,
                             const SubgradientPair& pair_v, double cert_tol = kCertTol);

// Conjugate of u -> D_J^q(u, v) evaluated at p: J*(p+q) - J*(q). Returns
// +infinity when p+q leaves dom J*.
double shifted_conjugate(const Functional& J, const SubgradientPair& pair_v, const Vec& p,
                         double cert_tol = kCertTol);

struct InfConvResult {
  double value;
  Vec argmin;
};

// inf_v D_J^{p1}(u - v, u1) + D_J^{p2}(v, u2), solved exactly per
// coordinate for the separable kinds. Ties in the piecewise-linear case
// resolve toward the v of smaller magnitude.
InfConvResult infconv_bregman(const Functional& J, const Vec& u, const SubgradientPair& pair1,
                              const SubgradientPair& pair2, double cert_tol = kCertTol);

}  // namespace bregkit
