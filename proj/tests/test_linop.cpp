#include "bregkit/linop.hpp"

#include <Eigen/SVD>

#include "bregkit/rng.hpp"
#include "doctest.h"

using namespace bregkit;

namespace {

Vec make_vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Mat random_matrix(SplitStream& rng, Index m, Index n) {
  Mat a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.gaussian();
  return a;
}

}  // namespace

TEST_CASE("apply and adjoint") {
  LinOp id = LinOp::identity(2);
  CHECK(id.apply(make_vec({3, 1})).isApprox(make_vec({3, 1})));

  Mat row(1, 2);
  row << 1, 1;
  LinOp k(row);
  CHECK(k.apply(make_vec({1, 2}))[0] == doctest::Approx(3.0));
  CHECK(k.apply_adjoint(make_vec({2})).isApprox(make_vec({2, 2})));

  CHECK_THROWS_AS(k.apply(make_vec({1})), Error);
  CHECK_THROWS_AS(k.apply_adjoint(make_vec({1, 2})), Error);

  SplitStream rng(3, 0);
  LinOp r(random_matrix(rng, 5, 7));
  for (int trial = 0; trial < 20; ++trial) {
    Vec u = rng.gaussian_vec(7);
    Vec w = rng.gaussian_vec(5);
    double lhs = r.apply(u).dot(w);
    double rhs = u.dot(r.apply_adjoint(w));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("operator norm via power iteration") {
  SplitStream rng(5, 0);
  Mat a = random_matrix(rng, 6, 4);
  LinOp k(a);
  Eigen::JacobiSVD<Mat> svd(a);
  double expect = svd.singularValues()[0];
  CHECK(k.op_norm_sq() == doctest::Approx(expect * expect).epsilon(1e-9));
  CHECK(LinOp::identity(3).op_norm_sq() == doctest::Approx(1.0));
}

TEST_CASE("sign-constrained least squares worked cases") {
  LinOp id = LinOp::identity(2);
  Vec f = make_vec({3, 1});

  Vec u1 = sign_constrained_lsq(id, f, SignedSupport{{0}, {+1}});
  CHECK(u1.isApprox(make_vec({3, 0})));

  Vec u2 = sign_constrained_lsq(id, f, SignedSupport{{0, 1}, {+1, +1}});
  CHECK(u2.isApprox(make_vec({3, 1})));

  // clamp path: second coordinate wants the wrong sign
  Vec u3 = sign_constrained_lsq(id, make_vec({3, -1}), SignedSupport{{0, 1}, {+1, +1}});
  CHECK(u3.isApprox(make_vec({3, 0})));
  // the clamped gradient has the sign demanded by the constraint
  Vec g = id.apply_adjoint(id.apply(u3) - make_vec({3, -1}));
  CHECK(g[1] == doctest::Approx(1.0));
}

TEST_CASE("sign-constrained least squares properties") {
  SplitStream rng(7, 1);
  for (int trial = 0; trial < 40; ++trial) {
    Index m = 6, n = 10;
    LinOp k(random_matrix(rng, m, n));
    Vec f = rng.gaussian_vec(m);
    SignedSupport ss;
    for (Index i = 0; i < n; ++i) {
      if (rng.uniform() < 0.4) {
        ss.indices.push_back(i);
        ss.signs.push_back(rng.uniform() < 0.5 ? 1 : -1);
      }
    }
    if (ss.indices.size() > 5) {
      ss.indices.resize(5);
      ss.signs.resize(5);
    }
    if (ss.indices.empty()) continue;
    Vec u = sign_constrained_lsq(k, f, ss);
    // objective never worse than the zero vector
    CHECK(0.5 * (k.apply(u) - f).squaredNorm() <= 0.5 * f.squaredNorm() + 1e-12);
    // complementarity: off-support coordinates are exactly zero
    for (Index i = 0; i < n; ++i) {
      bool on = false;
      for (std::size_t j = 0; j < ss.indices.size(); ++j) {
        if (ss.indices[j] == i) {
          on = true;
          CHECK(u[i] * static_cast<double>(ss.signs[j]) >= 0.0);
        }
      }
      if (!on) CHECK(u[i] == 0.0);
    }
  }
}

TEST_CASE("rank-deficient support is rejected") {
  Mat a(2, 3);
  a << 1, 1, 0, 2, 2, 0;  // first two columns collinear, third zero
  LinOp k(a);
  CHECK_THROWS_AS(sign_constrained_lsq(k, make_vec({1, 1}), SignedSupport{{0, 1}, {1, 1}}), Error);
  CHECK_THROWS_AS(sign_constrained_lsq(k, make_vec({1, 1}), SignedSupport{{2}, {1}}), Error);
}
