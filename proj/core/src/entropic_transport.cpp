#include "bregkit/entropic_transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bregkit {

Mat gibbs_kernel(const Mat& cost, double eps) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
  require(cost.allFinite(), ErrorCode::DomainError, "costs must be finite");
  return (-cost / eps).array().exp();
}

namespace {

double logsumexp(const Vec& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

namespace {

// one scaling phase at a fixed eps; returns sweeps used, -1 on budget
// exhaustion. Histories are appended only when recording.
struct ScalingState {
  Vec fpot, gpot;
  Mat plan;
  double row_residual = 0.0, col_residual = 0.0;
};

int scale_at_eps(const Mat& c, const Vec& mu_w, const Vec& nu_w, double eps, double tol,
                 int max_iter, ScalingState& st, TransportPlan* record, double gibbs_mass) {
  const Index n = c.rows(), m = c.cols();
  for (int sweep = 1; sweep <= max_iter; ++sweep) {
    for (Index i = 0; i < n; ++i) {
      Vec t = (st.gpot.array() - c.row(i).transpose().array()) / eps;
      st.fpot[i] = eps * (std::log(mu_w[i]) - logsumexp(t));
    }
    for (Index j = 0; j < m; ++j) {
      Vec t = (st.fpot.array() - c.col(j).array()) / eps;
      st.gpot[j] = eps * (std::log(nu_w[j]) - logsumexp(t));
    }
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j)
        st.plan(i, j) = std::exp((st.fpot[i] + st.gpot[j] - c(i, j)) / eps);

    if (record != nullptr) {
      double s = 0.0;
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) s += st.plan(i, j) * (st.fpot[i] + st.gpot[j]) / eps;
      record->kl_history.push_back(s + gibbs_mass - st.plan.sum());
      // dual of the projection problem: coordinate ascent climbs to the
      // primal value at the solution
      double dual = gibbs_mass - st.plan.sum() +
                    (st.fpot.dot(mu_w) + st.gpot.dot(nu_w)) / eps;
      record->dual_history.push_back(dual);
    }

    st.row_residual = (st.plan.rowwise().sum() - mu_w).lpNorm<Eigen::Infinity>();
    st.col_residual = (st.plan.colwise().sum().transpose() - nu_w).lpNorm<Eigen::Infinity>();
    if (st.row_residual <= tol && st.col_residual <= tol) return sweep;
  }
  return -1;
}

}  // namespace

TransportPlan sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Mat& cost,
                       double eps, double tol, int max_iter, double anneal_from) {
  mu.validate();
  nu.validate();
  require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
  require(cost.rows() == mu.weights.size() && cost.cols() == nu.weights.size(),
          ErrorCode::DimensionMismatch, "cost matrix does not match the measures");
  require(cost.allFinite(), ErrorCode::DomainError, "costs must be finite");

  // drop zero-weight atoms; scalings would divide by their mass
  std::vector<Index> rows, cols;
  for (Index i = 0; i < mu.weights.size(); ++i)
    if (mu.weights[i] > 0.0) rows.push_back(i);
  for (Index j = 0; j < nu.weights.size(); ++j)
    if (nu.weights[j] > 0.0) cols.push_back(j);
  require(!rows.empty() && !cols.empty(), ErrorCode::EmptySupport, "a marginal has no mass");

  const Index n = static_cast<Index>(rows.size());
  const Index m = static_cast<Index>(cols.size());
  Mat c(n, m);
  Vec mu_w(n), nu_w(m);
  for (Index i = 0; i < n; ++i) {
    mu_w[i] = mu.weights[rows[i]];
    for (Index j = 0; j < m; ++j) c(i, j) = cost(rows[i], cols[j]);
  }
  for (Index j = 0; j < m; ++j) nu_w[j] = nu.weights[cols[j]];

  double gibbs_mass = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) gibbs_mass += std::exp(-c(i, j) / eps);

  TransportPlan out;
  out.eps = eps;
  out.kept_rows = rows;
  out.kept_cols = cols;

  ScalingState st;
  st.fpot = Vec::Zero(n);
  st.gpot = Vec::Zero(m);
  st.plan = Mat::Zero(n, m);

  int used = 0;
  for (double rung = anneal_from; rung > 1.5 * eps; rung *= 0.5) {
    int s = scale_at_eps(c, mu_w, nu_w, rung, std::max(tol, 1e-10), 3000, st, nullptr, 0.0);
    used += s < 0 ? 3000 : s;
  }
  int final_sweeps =
      scale_at_eps(c, mu_w, nu_w, eps, tol, std::max(1, max_iter - used), st, &out, gibbs_mass);
  out.iterations = used + (final_sweeps < 0 ? std::max(1, max_iter - used) : final_sweeps);
  out.row_residual = st.row_residual;
  out.col_residual = st.col_residual;
  require(final_sweeps > 0, ErrorCode::MaxIterExceeded,
          "marginal residuals (" + std::to_string(out.row_residual) + ", " +
              std::to_string(out.col_residual) + ") above tolerance after " +
              std::to_string(max_iter) + " sweeps");

  out.plan = Mat::Zero(mu.weights.size(), nu.weights.size());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) out.plan(rows[i], cols[j]) = st.plan(i, j);
  out.cost = (cost.array() * out.plan.array()).sum();
  out.kl_objective = out.kl_history.back();
  return out;
}

AssignmentResult exact_ot_bruteforce(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     const Mat& cost) {
  mu.validate();
  nu.validate();
  const Index n = mu.weights.size();
  require(nu.weights.size() == n, ErrorCode::DimensionMismatch, "marginals must have equal size");
  require(n <= 9, ErrorCode::TooLarge, "brute force is limited to n <= 9");
  require(cost.rows() == n && cost.cols() == n, ErrorCode::DimensionMismatch,
          "cost matrix size mismatch");
  double w = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    require(std::abs(mu.weights[i] - w) <= 1e-12 && std::abs(nu.weights[i] - w) <= 1e-12,
            ErrorCode::InvalidArgument, "brute force needs uniform marginals");
  }

  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  AssignmentResult best;
  best.cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (Index i = 0; i < n; ++i) c += cost(i, perm[i]);
    c *= w;
    if (c < best.cost) {  // strict: keeps the first lexicographic argmin
      best.cost = c;
      best.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Mat bregman_cost_matrix(const Functional& J, const std::vector<Vec>& points_u,
                        const std::vector<Vec>& points_v) {
  require(J.kind() == FunctionalKind::SquaredL2 || J.kind() == FunctionalKind::BoltzmannEntropy,
          ErrorCode::UnsupportedFunctional, "cost construction needs a differentiable kind");
  require(!points_u.empty() && !points_v.empty(), ErrorCode::InvalidArgument, "no points");
  Mat c(static_cast<Index>(points_v.size()), static_cast<Index>(points_u.size()));
  for (std::size_t j = 0; j < points_u.size(); ++j) {
    SubgradientPair pair = select_pair(J, points_u[j]);  // unique gradient
    for (std::size_t i = 0; i < points_v.size(); ++i)
      c(static_cast<Index>(i), static_cast<Index>(j)) = bregman(J, points_v[i], pair);
  }
  return c;
}

}  // namespace bregkit
