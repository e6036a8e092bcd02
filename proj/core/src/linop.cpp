#include "bregkit/linop.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace bregkit {

LinOp::LinOp(Mat a) : a_(std::move(a)) {
  require(a_.rows() >= 1 && a_.cols() >= 1, ErrorCode::DimensionMismatch, "empty operator");
  require(a_.allFinite(), ErrorCode::DomainError, "operator entries must be finite");
}

LinOp LinOp::identity(Index n) { return LinOp(Mat::Identity(n, n)); }

Vec LinOp::apply(const Vec& u) const {
  require(u.size() == cols(), ErrorCode::DimensionMismatch, "apply: size mismatch");
  return a_ * u;
}

Vec LinOp::apply_adjoint(const Vec& w) const {
  require(w.size() == rows(), ErrorCode::DimensionMismatch, "apply_adjoint: size mismatch");
  return a_.transpose() * w;
}

double LinOp::op_norm_sq(int iters, double tol) const {
  Vec v = Vec::Ones(cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vec w = a_.transpose() * (a_ * v);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    double next = (a_ * w).squaredNorm();
    if (std::abs(next - lambda) <= tol * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
    v = w;
  }
  return lambda;
}

void SignedSupport::validate(Index n) const {
  require(indices.size() == signs.size(), ErrorCode::DimensionMismatch,
          "support/sign length mismatch");
  for (std::size_t k = 0; k < indices.size(); ++k) {
    require(indices[k] >= 0 && indices[k] < n, ErrorCode::DimensionMismatch,
            "support index out of range");
    require(signs[k] == 1 || signs[k] == -1, ErrorCode::InvalidArgument, "signs must be +-1");
    for (std::size_t j = k + 1; j < indices.size(); ++j)
      require(indices[j] != indices[k], ErrorCode::InvalidArgument, "duplicate support index");
  }
}

namespace {

// least squares on a column subset, with the rank guard
Vec subset_lsq(const Mat& a, const Vec& f, const std::vector<Index>& cols) {
  Mat ka(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    ka.col(static_cast<Index>(j)) = a.col(cols[j]);
  Eigen::ColPivHouseholderQR<Mat> qr(ka);
  Vec rdiag = qr.matrixR().diagonal().cwiseAbs();
  require(ka.rows() >= ka.cols() && rdiag.minCoeff() > 1e-10 * rdiag.maxCoeff(),
          ErrorCode::RankDeficient, "restricted columns are rank deficient");
  return qr.solve(f);
}

// KKT test for min 1/2||Ku-f||^2 with sign(u_i) in {0, sign_i} on S:
// gradient vanishes on nonzero coordinates, sign_i * grad_i >= 0 on
// clamped ones.
bool kkt_holds(const LinOp& K, const Vec& f, const SignedSupport& ss, const Vec& u,
               double kkt_tol) {
  Vec g = K.apply_adjoint(K.apply(u) - f);
  double scale = std::max(1.0, K.apply_adjoint(f).lpNorm<Eigen::Infinity>());
  for (std::size_t j = 0; j < ss.indices.size(); ++j) {
    Index i = ss.indices[j];
    if (u[i] != 0.0) {
      if (std::abs(g[i]) > kkt_tol * scale) return false;
    } else if (static_cast<double>(ss.signs[j]) * g[i] < -kkt_tol * scale) {
      return false;
    }
  }
  return true;
}

// Lawson-Hanson NNLS on sign-flipped columns; exact KKT in finitely many
// passive-set updates.
Vec signed_nnls(const LinOp& K, const Vec& f, const SignedSupport& ss, double kkt_tol) {
  const Index n = K.cols();
  Mat a = Mat::Zero(K.rows(), static_cast<Index>(ss.indices.size()));
  for (std::size_t j = 0; j < ss.indices.size(); ++j)
    a.col(static_cast<Index>(j)) =
        static_cast<double>(ss.signs[j]) * K.matrix().col(ss.indices[j]);

  const Index s = a.cols();
  Vec x = Vec::Zero(s);  // flipped coordinates, feasible means x >= 0
  std::vector<bool> passive(s, false);
  double scale = std::max(1.0, (a.transpose() * f).lpNorm<Eigen::Infinity>());

  int budget = 3 * static_cast<int>(s) + 10;
  for (int round = 0; round < budget; ++round) {
    Vec g = a.transpose() * (f - a * x);  // negative gradient in x
    Index best = -1;
    double best_val = kkt_tol * scale;
    for (Index j = 0; j < s; ++j)
      if (!passive[j] && g[j] > best_val) {
        best_val = g[j];
        best = j;
      }
    if (best < 0) break;  // KKT reached
    passive[best] = true;

    for (int inner = 0; inner < budget; ++inner) {
      std::vector<Index> pcols;
      for (Index j = 0; j < s; ++j)
        if (passive[j]) pcols.push_back(j);
      Vec z_sub = subset_lsq(a, f, pcols);
      Vec z = Vec::Zero(s);
      for (std::size_t j = 0; j < pcols.size(); ++j) z[pcols[j]] = z_sub[static_cast<Index>(j)];
      bool ok = true;
      for (Index j : pcols)
        if (z[j] <= 0.0) ok = false;
      if (ok) {
        x = z;
        break;
      }
      double theta = 1.0;
      for (Index j : pcols)
        if (z[j] <= 0.0) theta = std::min(theta, x[j] / (x[j] - z[j]));
      x += theta * (z - x);
      double xs = std::max(1.0, x.lpNorm<Eigen::Infinity>());
      for (Index j : pcols) {
        if (x[j] <= 1e-12 * xs) {
          x[j] = 0.0;
          passive[j] = false;
        }
      }
    }
  }

  Vec u = Vec::Zero(n);
  for (std::size_t j = 0; j < ss.indices.size(); ++j)
    u[ss.indices[j]] = static_cast<double>(ss.signs[j]) * x[static_cast<Index>(j)];
  return u;
}

}  // namespace

Vec sign_constrained_lsq(const LinOp& K, const Vec& f, const SignedSupport& ss, double kkt_tol) {
  const Index n = K.cols();
  require(f.size() == K.rows(), ErrorCode::DimensionMismatch, "data size mismatch");
  ss.validate(n);
  if (ss.indices.empty()) return Vec::Zero(n);
  subset_lsq(K.matrix(), f, ss.indices);  // full-rank precondition on all of S

  // fast path: repeated unconstrained solves with violating signs clamped
  std::vector<Index> active = ss.indices;
  std::vector<int> act_signs = ss.signs;
  Vec u = Vec::Zero(n);
  for (std::size_t round = 0; round <= ss.indices.size(); ++round) {
    if (active.empty()) break;
    Vec us = subset_lsq(K.matrix(), f, active);
    std::vector<Index> keep_idx;
    std::vector<int> keep_signs;
    for (std::size_t j = 0; j < active.size(); ++j) {
      if (static_cast<double>(act_signs[j]) * us[static_cast<Index>(j)] < 0.0) continue;
      keep_idx.push_back(active[j]);
      keep_signs.push_back(act_signs[j]);
    }
    if (keep_idx.size() == active.size()) {
      u.setZero();
      for (std::size_t j = 0; j < active.size(); ++j) u[active[j]] = us[static_cast<Index>(j)];
      break;
    }
    active.swap(keep_idx);
    act_signs.swap(keep_signs);
  }
  if (kkt_holds(K, f, ss, u, kkt_tol)) return u;

  // clamping alone can strand a coordinate whose multiplier should flip;
  // the NNLS pass settles the exact passive set
  u = signed_nnls(K, f, ss, kkt_tol);
  require(kkt_holds(K, f, ss, u, kkt_tol), ErrorCode::NonConvergence,
          "active-set refinement failed to reach a KKT point");
  return u;
}

}  // namespace bregkit
