#pragma once

#include <vector>

#include "bregkit/types.hpp"

namespace bregkit {

// Dense linear operator K: R^N -> R^M with its adjoint.
class LinOp {
 public:
  explicit LinOp(Mat a);
  static LinOp identity(Index n);

  Index rows() const { return a_.rows(); }
  Index cols() const { return a_.cols(); }
  const Mat& matrix() const { return a_; }

  Vec apply(const Vec& u) const;
  Vec apply_adjoint(const Vec& w) const;

  // ||K||_op^2 by power iteration on K^T K (deterministic start vector).
  double op_norm_sq(int iters = 200, double tol = 1e-12) const;

 private:
  Mat a_;
};

// Active set with prescribed orientation: indices carry the sign each
// nonzero coordinate is allowed to take.
struct SignedSupport {
  std::vector<Index> indices;
  std::vector<int> signs;  // +1 or -1, parallel to indices

  void validate(Index n) const;
};

// min 1/2 ||K u - f||^2 over u supported on the signed set, subject to
// sign(u_i) in {0, sign_i}. Active-set loop: unconstrained least squares on
// the current set (QR), clamp sign violations, repeat; at most |S| solves.
// KKT is verified on exit: grad_i = 0 on nonzero coordinates, sign_i *
// grad_i >= -tol on clamped ones.
Vec sign_constrained_lsq(const LinOp& K, const Vec& f, const SignedSupport& ss,
                         double kkt_tol = 1e-9);

}  // namespace bregkit
