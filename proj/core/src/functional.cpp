#include "bregkit/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bregkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// feasibility slack for the indicator conjugates of one-homogeneous kinds
constexpr double kFeasTol = 1e-9;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::CertError: return "CertError";
    case ErrorCode::NotDifferentiable: return "NotDifferentiable";
    case ErrorCode::ConjugateUnavailable: return "ConjugateUnavailable";
    case ErrorCode::UnsupportedFunctional: return "UnsupportedFunctional";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::NotCertified: return "NotCertified";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxBreakpointsExceeded: return "MaxBreakpointsExceeded";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::NotMinimizer: return "NotMinimizer";
    case ErrorCode::MeshMismatch: return "MeshMismatch";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IOError: return "IOError";
  }
  return "Error";
}

Functional Functional::squared_l2() { return Functional(FunctionalKind::SquaredL2, Vec(), 1.0); }

Functional Functional::weighted_l1(Vec weights) {
  require(weights.size() >= 1, ErrorCode::InvalidArgument, "weighted_l1 needs at least one weight");
  require((weights.array() > 0.0).all(), ErrorCode::InvalidArgument,
          "weighted_l1 weights must be positive");
  return Functional(FunctionalKind::WeightedL1, std::move(weights), 1.0);
}

Functional Functional::boltzmann_entropy() {
  return Functional(FunctionalKind::BoltzmannEntropy, Vec(), 1.0);
}

Functional Functional::tv_1d(double grid_spacing) {
  require(grid_spacing > 0.0, ErrorCode::InvalidArgument, "tv_1d needs positive grid spacing");
  return Functional(FunctionalKind::TV1D, Vec(), grid_spacing);
}

bool Functional::in_domain(const Vec& u) const {
  if (!all_finite(u)) return false;
  if (kind_ == FunctionalKind::BoltzmannEntropy) return (u.array() >= 0.0).all();
  return true;
}

double Functional::eval(const Vec& u) const {
  require(u.size() >= 1, ErrorCode::DimensionMismatch, "empty vector");
  require(in_domain(u), ErrorCode::DomainError, "point outside dom J");
  switch (kind_) {
    case FunctionalKind::SquaredL2:
      return 0.5 * u.squaredNorm();
    case FunctionalKind::WeightedL1:
      require(u.size() == weights_.size(), ErrorCode::DimensionMismatch, "weights/point mismatch");
      return (weights_.array() * u.array().abs()).sum();
    case FunctionalKind::BoltzmannEntropy: {
      double s = 0.0;
      for (Index i = 0; i < u.size(); ++i) s += xlogx(u[i]) + 1.0 - u[i];
      return s;
    }
    case FunctionalKind::TV1D: {
      double s = 0.0;
      for (Index i = 0; i + 1 < u.size(); ++i) s += std::abs(u[i + 1] - u[i]);
      return s;
    }
  }
  return 0.0;
}

Vec Functional::subgradient(const Vec& u) const {
  require(in_domain(u), ErrorCode::DomainError, "point outside dom J");
  switch (kind_) {
    case FunctionalKind::SquaredL2:
      return u;
    case FunctionalKind::WeightedL1: {
      require(u.size() == weights_.size(), ErrorCode::DimensionMismatch, "weights/point mismatch");
      Vec p(u.size());
      for (Index i = 0; i < u.size(); ++i)
        p[i] = u[i] > 0.0 ? weights_[i] : (u[i] < 0.0 ? -weights_[i] : 0.0);
      return p;
    }
    case FunctionalKind::BoltzmannEntropy: {
      Vec p(u.size());
      for (Index i = 0; i < u.size(); ++i) {
        require(u[i] > 0.0, ErrorCode::NotDifferentiable,
                "entropy subdifferential is empty at a zero entry");
        p[i] = std::log(u[i]);
      }
      return p;
    }
    case FunctionalKind::TV1D: {
      const Index n = u.size();
      Vec p = Vec::Zero(n);
      double q_prev = 0.0;
      for (Index e = 0; e < n - 1; ++e) {
        double d = u[e + 1] - u[e];
        double q = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        p[e] = q_prev - q;
        q_prev = q;
      }
      p[n - 1] = q_prev;
      return p;
    }
  }
  return Vec();
}

double Functional::conjugate(const Vec& p) const {
  require(all_finite(p), ErrorCode::DomainError, "non-finite dual point");
  switch (kind_) {
    case FunctionalKind::SquaredL2:
      return 0.5 * p.squaredNorm();
    case FunctionalKind::WeightedL1: {
      require(p.size() == weights_.size(), ErrorCode::DimensionMismatch, "weights/point mismatch");
      for (Index i = 0; i < p.size(); ++i)
        if (std::abs(p[i]) - weights_[i] > kFeasTol * std::max(1.0, weights_[i])) return kInf;
      return 0.0;
    }
    case FunctionalKind::BoltzmannEntropy: {
      double s = 0.0;
      for (Index i = 0; i < p.size(); ++i) s += std::expm1(p[i]);
      return s;
    }
    case FunctionalKind::TV1D: {
      // p is in dom J* iff p = D^T phi with |phi| <= 1, i.e. the partial
      // sums of p stay in [-1,1] and the total sum vanishes.
      const Index n = p.size();
      double scale = std::max(1.0, p.lpNorm<1>());
      double run = 0.0;
      for (Index i = 0; i + 1 < n; ++i) {
        run += p[i];
        if (std::abs(run) > 1.0 + kFeasTol) return kInf;
      }
      run += p[n - 1];
      if (std::abs(run) > kFeasTol * scale) return kInf;
      return 0.0;
    }
  }
  return 0.0;
}

namespace {

// stationarity of tau*(u log u + 1 - u) + (u-f)^2/2 in x = log u:
// tau*x + exp(x) - f = 0; convex and increasing, Newton from the right.
double prox_entropy_scalar(double f, double tau) {
  double x = f > 1.0 ? std::log(f) : 0.0;
  for (int it = 0; it < 200; ++it) {
    double ex = std::exp(x);
    double g = tau * x + ex - f;
    if (std::abs(g) <= 1e-15 * (1.0 + std::abs(f))) break;
    double step = g / (tau + ex);
    x -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) break;
  }
  return std::exp(x);
}

}  // namespace

// Direct 1D total variation denoising (taut-string sweep, Condat 2013).
Vec prox_tv1d(const Vec& y, double lambda) {
  const Index n = y.size();
  require(n >= 1, ErrorCode::DimensionMismatch, "empty vector");
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "negative prox weight");
  if (n == 1 || lambda == 0.0) return y;

  Vec x(n);
  Index k = 0, k0 = 0, km = 0, kp = 0;
  double vmin = y[0] - lambda, vmax = y[0] + lambda;
  double umin = lambda, umax = -lambda;

  for (;;) {
    if (k == n - 1) {
      // tail segment: flush remaining jumps, then the final plateau
      if (umin < 0.0) {
        for (Index i = k0; i <= km; ++i) x[i] = vmin;
        k = k0 = km = km + 1;
        vmin = y[k];
        umin = lambda;
        umax = y[k] + lambda - vmax;
        continue;
      }
      if (umax > 0.0) {
        for (Index i = k0; i <= kp; ++i) x[i] = vmax;
        k = k0 = kp = kp + 1;
        vmax = y[k];
        umax = -lambda;
        umin = y[k] - lambda - vmin;
        continue;
      }
      for (Index i = k0; i <= n - 1; ++i) x[i] = vmin + umin / static_cast<double>(k - k0 + 1);
      return x;
    }
    if (y[k + 1] + umin < vmin - lambda) {  // lower string breaks: jump down
      for (Index i = k0; i <= km; ++i) x[i] = vmin;
      k = k0 = km = kp = km + 1;
      vmin = y[k];
      vmax = y[k] + 2.0 * lambda;
      umin = lambda;
      umax = -lambda;
    } else if (y[k + 1] + umax > vmax + lambda) {  // upper string breaks: jump up
      for (Index i = k0; i <= kp; ++i) x[i] = vmax;
      k = k0 = km = kp = kp + 1;
      vmin = y[k] - 2.0 * lambda;
      vmax = y[k];
      umin = lambda;
      umax = -lambda;
    } else {  // extend the segment
      k += 1;
      umin += y[k] - vmin;
      umax += y[k] - vmax;
      if (umin >= lambda) {
        vmin += (umin - lambda) / static_cast<double>(k - k0 + 1);
        umin = lambda;
        km = k;
      }
      if (umax <= -lambda) {
        vmax += (umax + lambda) / static_cast<double>(k - k0 + 1);
        umax = -lambda;
        kp = k;
      }
    }
  }
}

Vec Functional::prox(const Vec& f, double tau) const {
  require(tau >= 0.0, ErrorCode::InvalidArgument, "negative prox weight");
  require(all_finite(f), ErrorCode::DomainError, "non-finite prox input");
  switch (kind_) {
    case FunctionalKind::SquaredL2:
      return f / (1.0 + tau);
    case FunctionalKind::WeightedL1: {
      require(f.size() == weights_.size(), ErrorCode::DimensionMismatch, "weights/point mismatch");
      Vec u(f.size());
      for (Index i = 0; i < f.size(); ++i) {
        double t = tau * weights_[i];
        u[i] = f[i] > t ? f[i] - t : (f[i] < -t ? f[i] + t : 0.0);
      }
      return u;
    }
    case FunctionalKind::BoltzmannEntropy: {
      Vec u(f.size());
      for (Index i = 0; i < f.size(); ++i) u[i] = prox_entropy_scalar(f[i], tau);
      return u;
    }
    case FunctionalKind::TV1D:
      return prox_tv1d(f, tau);
  }
  return f;
}

double duality_gap(const Functional& J, const Vec& u, const Vec& p) {
  require(u.size() == p.size(), ErrorCode::DimensionMismatch, "point/subgradient mismatch");
  double conj = J.conjugate(p);
  if (!std::isfinite(conj)) return kInf;
  return J.eval(u) + conj - p.dot(u);
}

SubgradientPair certify(const Functional& J, Vec u, Vec p, double tol) {
  require(all_finite(u) && all_finite(p), ErrorCode::DomainError, "non-finite pair");
  double gap = duality_gap(J, u, p);
  double bound = tol * (1.0 + std::abs(J.eval(u)));
  require(gap <= bound, ErrorCode::CertError,
          "Fenchel-Young gap " + std::to_string(gap) + " exceeds " + std::to_string(bound));
  return SubgradientPair{std::move(u), std::move(p)};
}

SubgradientPair select_pair(const Functional& J, const Vec& u) {
  return certify(J, u, J.subgradient(u));
}

double bregman(const Functional& J, const Vec& v, const SubgradientPair& pair, double cert_tol) {
  require(J.in_domain(v), ErrorCode::DomainError, "v outside dom J");
  require(v.size() == pair.u.size(), ErrorCode::DimensionMismatch, "v/pair mismatch");
  certify(J, pair.u, pair.p, cert_tol);
  return J.eval(v) - J.eval(pair.u) - pair.p.dot(v - pair.u);
}

double symmetric_bregman(const Functional& J, const SubgradientPair& pair_u,
                         const SubgradientPair& pair_v, double cert_tol) {
  certify(J, pair_u.u, pair_u.p, cert_tol);
  certify(J, pair_v.u, pair_v.p, cert_tol);
  return (pair_u.p - pair_v.p).dot(pair_u.u - pair_v.u);
}

double dual_bregman_residual(const Functional& J, const SubgradientPair& pair_u,
                             const SubgradientPair& pair_v, double cert_tol) {
  certify(J, pair_u.u, pair_u.p, cert_tol);
  certify(J, pair_v.u, pair_v.p, cert_tol);
  double primal = bregman(J, pair_v.u, pair_u, cert_tol);
  double conj_p = J.conjugate(pair_u.p);
  double conj_q = J.conjugate(pair_v.p);
  require(std::isfinite(conj_p) && std::isfinite(conj_q), ErrorCode::ConjugateUnavailable,
          "certified subgradient fell outside dom J*");
  double dual = conj_p - conj_q - pair_v.u.dot(pair_u.p - pair_v.p);
  return std::abs(primal - dual);
}

double shifted_conjugate(const Functional& J, const SubgradientPair& pair_v, const Vec& p,
                         double cert_tol) {
  certify(J, pair_v.u, pair_v.p, cert_tol);
  require(p.size() == pair_v.p.size(), ErrorCode::DimensionMismatch, "dual point mismatch");
  double conj_q = J.conjugate(pair_v.p);
  require(std::isfinite(conj_q), ErrorCode::DomainError, "q outside dom J*");
  double conj_pq = J.conjugate(p + pair_v.p);
  if (!std::isfinite(conj_pq)) return kInf;  // sentinel: p+q left dom J*
  return conj_pq - conj_q;
}

namespace {

struct ScalarMin {
  double value;
  double arg;
};

// one coordinate of inf_v D^{p1}(u-v,u1) + D^{p2}(v,u2)
ScalarMin infconv_scalar(FunctionalKind kind, double w, double u, double u1, double p1, double u2,
                         double p2) {
  switch (kind) {
    case FunctionalKind::SquaredL2: {
      // both terms quadratic; stationarity gives v = (u - u1 + u2)/2
      double v = 0.5 * (u - u1 + u2);
      double a = (u - v) - u1;
      double b = v - u2;
      return {0.5 * a * a + 0.5 * b * b, v};
    }
    case FunctionalKind::WeightedL1: {
      // piecewise linear with kinks at v = 0 and v = u only
      auto phi = [&](double v) {
        return w * std::abs(u - v) - p1 * (u - v) + w * std::abs(v) - p2 * v;
      };
      double f0 = phi(0.0);
      double fu = phi(u);
      if (f0 < fu - 1e-15 * (1.0 + std::abs(f0))) return {f0, 0.0};
      if (fu < f0 - 1e-15 * (1.0 + std::abs(fu))) return {fu, u};
      return std::abs(0.0) <= std::abs(u) ? ScalarMin{f0, 0.0} : ScalarMin{fu, u};
    }
    case FunctionalKind::BoltzmannEntropy: {
      require(u >= 0.0, ErrorCode::DomainError, "infimal convolution of KL needs u >= 0");
      auto kl = [](double a, double ref) { return xlogx(a) - a * std::log(ref) + ref - a; };
      if (u == 0.0) return {kl(0.0, u1) + kl(0.0, u2), 0.0};
      // interior stationarity: (u-v)/u1 = v/u2
      double v = u * u2 / (u1 + u2);
      return {kl(u - v, u1) + kl(v, u2), v};
    }
    case FunctionalKind::TV1D:
      break;
  }
  throw Error(ErrorCode::UnsupportedFunctional, "infimal convolution needs a separable functional");
}

}  // namespace

InfConvResult infconv_bregman(const Functional& J, const Vec& u, const SubgradientPair& pair1,
                              const SubgradientPair& pair2, double cert_tol) {
  require(J.separable(), ErrorCode::UnsupportedFunctional,
          "infimal convolution needs a separable functional");
  certify(J, pair1.u, pair1.p, cert_tol);
  certify(J, pair2.u, pair2.p, cert_tol);
  require(u.size() == pair1.u.size() && u.size() == pair2.u.size(), ErrorCode::DimensionMismatch,
          "point/pair mismatch");
  double value = 0.0;
  Vec argmin(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    double w = J.kind() == FunctionalKind::WeightedL1 ? J.weights()[i] : 1.0;
    ScalarMin m = infconv_scalar(J.kind(), w, u[i], pair1.u[i], pair1.p[i], pair2.u[i], pair2.p[i]);
    value += m.value;
    argmin[i] = m.arg;
  }
  return {value, argmin};
}

}  // namespace bregkit
