#include "bregkit/functional.hpp"

#include <cmath>

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

// independent KL oracle: sum v log(v/u) + u - v
double kl_oracle(const Vec& v, const Vec& u) {
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) s += v[i] * std::log(v[i] / u[i]);
    s += u[i] - v[i];
  }
  return s;
}

// paper's sign-split form of the l1 Bregman distance
double l1_sign_split_oracle(const Vec& v, const Vec& p, const Vec& w) {
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) s += (w[i] - p[i]) * std::abs(v[i]);
    if (v[i] < 0.0) s += (w[i] + p[i]) * std::abs(v[i]);
  }
  return s;
}

// high-accuracy dual solve of the TV prox: min_phi 1/2||y - D^T phi||^2,
// |phi| <= lambda, by projected FISTA
Vec tv_prox_dual_oracle(const Vec& y, double lambda, int iters = 300000) {
  const Index n = y.size();
  if (n == 1) return y;
  Vec phi = Vec::Zero(n - 1), z = phi;
  double t = 1.0;
  double step = 0.25;  // 1/||D||^2
  for (int it = 0; it < iters; ++it) {
    Vec x = y;
    for (Index e = 0; e < n - 1; ++e) {
      x[e] += z[e];
      x[e + 1] -= z[e];
    }
    Vec grad(n - 1);
    for (Index e = 0; e < n - 1; ++e) grad[e] = -(x[e + 1] - x[e]);
    Vec phi_new = z - step * grad;
    for (Index e = 0; e < n - 1; ++e) phi_new[e] = std::clamp(phi_new[e], -lambda, lambda);
    double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = phi_new + ((t - 1.0) / t_new) * (phi_new - phi);
    t = t_new;
    phi = phi_new;
  }
  Vec x = y;
  for (Index e = 0; e < n - 1; ++e) {
    x[e] += phi[e];
    x[e + 1] -= phi[e];
  }
  return x;
}

Vec random_domain_point(const Functional& J, SplitStream& rng, Index n) {
  Vec u = rng.gaussian_vec(n);
  if (J.kind() == FunctionalKind::BoltzmannEntropy)
    u = (u.array().abs() + 0.05).matrix();  // strictly positive
  return u;
}

}  // namespace

TEST_CASE("bregman distance worked values") {
  Functional sq = Functional::squared_l2();
  SubgradientPair pair = select_pair(sq, make_vec({1, 0}));
  CHECK(bregman(sq, make_vec({0, 1}), pair) == doctest::Approx(1.0).epsilon(1e-12));

  Functional l1 = Functional::weighted_l1(Vec::Ones(2));
  SubgradientPair pl1 = certify(l1, make_vec({2, 0}), make_vec({1, 0.5}));
  Vec v = make_vec({1, -3});
  double raw = l1.eval(v) - l1.eval(pl1.u) - pl1.p.dot(v - pl1.u);
  CHECK(raw == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(bregman(l1, v, pl1) == doctest::Approx(raw).epsilon(1e-12));
  CHECK(bregman(l1, v, pl1) ==
        doctest::Approx(l1_sign_split_oracle(v, pl1.p, l1.weights())).epsilon(1e-12));

  Functional ent = Functional::boltzmann_entropy();
  Vec ue = make_vec({1, 2});
  SubgradientPair pe = select_pair(ent, ue);
  CHECK(bregman(ent, ue, pe) == doctest::Approx(0.0).epsilon(1e-14));
  Vec ve = make_vec({2, 1});
  CHECK(bregman(ent, ve, pe) == doctest::Approx(kl_oracle(ve, ue)).epsilon(1e-12));
  CHECK(bregman(ent, ve, pe) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("bregman distance error paths") {
  Functional ent = Functional::boltzmann_entropy();
  SubgradientPair pe = select_pair(ent, make_vec({1, 2}));
  CHECK_THROWS_WITH_AS(bregman(ent, make_vec({-1, 1}), pe), doctest::Contains("DomainError"),
                       Error);
  // bad certificate
  Functional l1 = Functional::weighted_l1(Vec::Ones(2));
  SubgradientPair bad{make_vec({2, 0}), make_vec({-1, 0})};
  CHECK_THROWS_AS(bregman(l1, make_vec({1, 1}), bad), Error);
  // KL with zero entries in v is allowed
  CHECK(bregman(ent, make_vec({0, 0}), pe) == doctest::Approx(3.0));
}

TEST_CASE("symmetric bregman matches the sum of one-sided distances") {
  Functional l1 = Functional::weighted_l1(Vec::Ones(2));
  SubgradientPair a = certify(l1, make_vec({2, 0}), make_vec({1, 0.5}));
  SubgradientPair b = certify(l1, make_vec({1, -3}), make_vec({1, -1}));
  double sym = symmetric_bregman(l1, a, b);
  CHECK(sym == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(sym == doctest::Approx(bregman(l1, b.u, a) + bregman(l1, a.u, b)).epsilon(1e-10));

  Functional sq = Functional::squared_l2();
  SubgradientPair su = select_pair(sq, make_vec({1, 0}));
  SubgradientPair sv = select_pair(sq, make_vec({0, 1}));
  CHECK(symmetric_bregman(sq, su, sv) == doctest::Approx(2.0));
  CHECK(symmetric_bregman(sq, su, su) == doctest::Approx(0.0));
}

TEST_CASE("duality identity for all four kinds") {
  SplitStream rng(2024, 0);
  for (int trial = 0; trial < 50; ++trial) {
    Index n = 3 + static_cast<Index>(rng.below(5));
    std::vector<Functional> kinds = {Functional::squared_l2(),
                                     Functional::weighted_l1(rng.uniform_vec(n).array() + 0.5),
                                     Functional::boltzmann_entropy(), Functional::tv_1d(0.5)};
    for (const Functional& J : kinds) {
      Vec u = random_domain_point(J, rng, n);
      Vec v = random_domain_point(J, rng, n);
      SubgradientPair pu = select_pair(J, u);
      SubgradientPair pv = select_pair(J, v);
      double d = bregman(J, v, pu);
      CHECK(dual_bregman_residual(J, pu, pv) <= 1e-8 * (1.0 + d));
    }
  }
}

TEST_CASE("one-homogeneous reduction and orientation") {
  SplitStream rng(99, 1);
  for (int trial = 0; trial < 40; ++trial) {
    Index n = 2 + static_cast<Index>(rng.below(6));
    std::vector<Functional> kinds = {Functional::weighted_l1(rng.uniform_vec(n).array() + 0.25),
                                     Functional::tv_1d(1.0)};
    for (const Functional& J : kinds) {
      Vec u = rng.gaussian_vec(n);
      SubgradientPair pu = select_pair(J, u);
      Vec v = rng.gaussian_vec(n);
      double d = bregman(J, v, pu);
      double reduced = J.eval(v) - pu.p.dot(v);
      CHECK(d == doctest::Approx(reduced).epsilon(1e-12));

      double t_pos = 0.25 + 2.0 * rng.uniform();
      CHECK(bregman(J, t_pos * u, pu) == doctest::Approx(0.0).epsilon(1e-12));
      double t_neg = -t_pos;
      Vec vneg = t_neg * u;
      double expect = 2.0 * J.eval(vneg);
      CHECK(bregman(J, vneg, pu) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero distance characterizes shared subgradients") {
  SplitStream rng(7, 3);
  Functional l1 = Functional::weighted_l1(Vec::Ones(3));
  Vec u = make_vec({2, 0, -1});
  SubgradientPair pu = select_pair(l1, u);
  // v with the same sign pattern on the support of p
  Vec v = make_vec({5, 0, -0.5});
  CHECK(bregman(l1, v, pu) <= 1e-12);
  CHECK_NOTHROW(certify(l1, v, pu.p));
  // and conversely a certified transfer keeps the distance at zero
  SubgradientPair moved = certify(l1, v, pu.p);
  CHECK(bregman(l1, u, moved) <= 1e-12);
  // nonzero distance must reject the transfer
  Vec bad = make_vec({-1, 0, -0.5});
  CHECK(bregman(l1, bad, pu) > 1e-3);
  CHECK_THROWS_AS(certify(l1, bad, pu.p), Error);
}

TEST_CASE("subdifferential shift (certificate through the shifted conjugate)") {
  SplitStream rng(11, 0);
  std::vector<Functional> kinds = {Functional::squared_l2(), Functional::weighted_l1(Vec::Ones(4)),
                                   Functional::boltzmann_entropy()};
  for (const Functional& J : kinds) {
    for (int trial = 0; trial < 20; ++trial) {
      Vec u0 = random_domain_point(J, rng, 4);
      Vec v = random_domain_point(J, rng, 4);
      SubgradientPair p0 = select_pair(J, u0);
      SubgradientPair qv = select_pair(J, v);
      // H(x) = D_J^p(x, u0), subgradient q - p at v, conjugate via shift
      double h_v = bregman(J, v, p0);
      double h_conj = shifted_conjugate(J, p0, qv.p - p0.p);
      double gap = h_v + h_conj - (qv.p - p0.p).dot(v);
      CHECK(std::abs(gap) <= 1e-9 * (1.0 + std::abs(h_v)));
    }
  }
}

TEST_CASE("shifted conjugate worked values") {
  Functional sq = Functional::squared_l2();
  SubgradientPair pv = select_pair(sq, make_vec({1, 1}));
  CHECK(shifted_conjugate(sq, pv, make_vec({0, 0})) == doctest::Approx(0.0));
  CHECK(shifted_conjugate(sq, pv, make_vec({1, 0})) == doctest::Approx(1.5));

  Functional l1 = Functional::weighted_l1(Vec::Ones(2));
  SubgradientPair q = certify(l1, make_vec({3, 0}), make_vec({1, 0}));
  CHECK(std::isinf(shifted_conjugate(l1, q, make_vec({0.5, 0}))));
  CHECK(shifted_conjugate(l1, q, make_vec({-0.5, 0.25})) == doctest::Approx(0.0));
}

TEST_CASE("convexity of the distance in its first argument") {
  SplitStream rng(5, 9);
  std::vector<Functional> kinds = {Functional::squared_l2(), Functional::weighted_l1(Vec::Ones(5)),
                                   Functional::boltzmann_entropy(), Functional::tv_1d(1.0)};
  for (const Functional& J : kinds) {
    Vec u = random_domain_point(J, rng, 5);
    SubgradientPair pu = select_pair(J, u);
    for (int trial = 0; trial < 30; ++trial) {
      Vec x = random_domain_point(J, rng, 5);
      Vec y = random_domain_point(J, rng, 5);
      double mid = bregman(J, 0.5 * (x + y), pu);
      double avg = 0.5 * (bregman(J, x, pu) + bregman(J, y, pu));
      CHECK(mid <= avg + 1e-10 * (1.0 + std::abs(avg)));
    }
  }
}

TEST_CASE("subgradient selection is deterministic and certified") {
  Functional sq = Functional::squared_l2();
  CHECK(select_pair(sq, make_vec({3, 1})).p.isApprox(make_vec({3, 1})));

  Functional l1 = Functional::weighted_l1(Vec::Ones(2));
  CHECK(select_pair(l1, make_vec({2, 0})).p.isApprox(make_vec({1, 0})));

  Functional ent = Functional::boltzmann_entropy();
  Vec p = select_pair(ent, make_vec({1, std::exp(1.0)})).p;
  CHECK(p[0] == doctest::Approx(0.0));
  CHECK(p[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(select_pair(ent, make_vec({1, 0})), Error);

  SplitStream rng(31, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Functional> kinds = {sq, l1, ent, Functional::tv_1d(1.0)};
    for (const Functional& J : kinds) {
      Vec u = random_domain_point(J, rng, 2);
      CHECK_NOTHROW(select_pair(J, u));  // Fenchel-Young certificate holds
    }
  }
}

TEST_CASE("nonnegativity and strict positivity for the quadratic") {
  SplitStream rng(13, 13);
  Functional sq = Functional::squared_l2();
  for (int trial = 0; trial < 50; ++trial) {
    Vec u = rng.gaussian_vec(4);
    Vec v = rng.gaussian_vec(4);
    SubgradientPair pu = select_pair(sq, u);
    double d = bregman(sq, v, pu);
    CHECK(d >= -1e-12);
    if ((v - u).norm() > 1e-8) CHECK(d > 0.0);
  }
}

TEST_CASE("infimal convolution worked scalar cases") {
  Functional l1 = Functional::weighted_l1(Vec::Ones(1));
  SubgradientPair p1 = certify(l1, make_vec({1}), make_vec({1}));
  SubgradientPair p2 = certify(l1, make_vec({-1}), make_vec({-1}));

  InfConvResult plus = infconv_bregman(l1, make_vec({3}), p1, p2);
  CHECK(plus.value == doctest::Approx(0.0));
  CHECK(plus.argmin[0] == doctest::Approx(0.0));
  CHECK(bregman(l1, make_vec({3}), p1) == doctest::Approx(0.0));

  InfConvResult minus = infconv_bregman(l1, make_vec({-3}), p1, p2);
  CHECK(minus.value == doctest::Approx(0.0));
  CHECK(minus.argmin[0] == doctest::Approx(-3.0));
  CHECK(bregman(l1, make_vec({-3}), p1) == doctest::Approx(6.0));

  // pair2 = pair1 at u = u1: both shifts vanish
  InfConvResult same = infconv_bregman(l1, make_vec({1}), p1, p1);
  CHECK(same.value == doctest::Approx(0.0));
}

TEST_CASE("infimal convolution against a grid oracle") {
  SplitStream rng(17, 8);
  Functional l1 = Functional::weighted_l1(Vec::Ones(1));
  for (int trial = 0; trial < 50; ++trial) {
    double u1 = rng.gaussian() * 2.0;
    double u2 = rng.gaussian() * 2.0;
    double q1 = u1 != 0.0 ? (u1 > 0 ? 1.0 : -1.0) : 1.8 * (rng.uniform() - 0.5);
    double q2 = u2 != 0.0 ? (u2 > 0 ? 1.0 : -1.0) : 1.8 * (rng.uniform() - 0.5);
    SubgradientPair a = certify(l1, make_vec({u1}), make_vec({q1}));
    SubgradientPair b = certify(l1, make_vec({u2}), make_vec({q2}));
    double u = rng.gaussian() * 3.0;
    InfConvResult got = infconv_bregman(l1, make_vec({u}), a, b);

    double radius = 2.0 * std::max({std::abs(u), std::abs(u1), std::abs(u2), 1.0});
    double best = std::numeric_limits<double>::infinity();
    for (double v = -radius; v <= radius; v += 1e-4) {
      double val = std::abs(u - v) - q1 * (u - v) + std::abs(v) - q2 * v;
      best = std::min(best, val);
    }
    CHECK(got.value == doctest::Approx(best).epsilon(1e-6).scale(1.0));
    // contract: never worse than parking everything in either term
    double all_left = bregman(l1, make_vec({u}), a) + bregman(l1, make_vec({0.0}), b);
    double all_right = bregman(l1, make_vec({0.0}), a) + bregman(l1, make_vec({u}), b);
    CHECK(got.value <= std::min(all_left, all_right) + 1e-12);
  }
}

TEST_CASE("infimal convolution for quadratic and entropy kinds") {
  SplitStream rng(23, 2);
  Functional sq = Functional::squared_l2();
  Functional ent = Functional::boltzmann_entropy();
  for (int trial = 0; trial < 25; ++trial) {
    Vec u1 = rng.gaussian_vec(1), u2 = rng.gaussian_vec(1);
    SubgradientPair a = select_pair(sq, u1);
    SubgradientPair b = select_pair(sq, u2);
    double u = rng.gaussian() * 2.0;
    InfConvResult got = infconv_bregman(sq, make_vec({u}), a, b);
    double best = std::numeric_limits<double>::infinity();
    for (double v = -8.0; v <= 8.0; v += 1e-4) {
      double val = 0.5 * (u - v - u1[0]) * (u - v - u1[0]) + 0.5 * (v - u2[0]) * (v - u2[0]);
      best = std::min(best, val);
    }
    CHECK(got.value == doctest::Approx(best).epsilon(1e-6).scale(1.0));
  }
  for (int trial = 0; trial < 25; ++trial) {
    Vec u1 = make_vec({0.2 + rng.uniform()});
    Vec u2 = make_vec({0.2 + rng.uniform()});
    SubgradientPair a = select_pair(ent, u1);
    SubgradientPair b = select_pair(ent, u2);
    double u = 0.1 + 2.0 * rng.uniform();
    InfConvResult got = infconv_bregman(ent, make_vec({u}), a, b);
    double best = std::numeric_limits<double>::infinity();
    auto kl1 = [&](double x, double ref) {
      return (x > 0 ? x * std::log(x / ref) : 0.0) + ref - x;
    };
    for (double v = 0.0; v <= u; v += u * 1e-4) {
      best = std::min(best, kl1(u - v, u1[0]) + kl1(v, u2[0]));
    }
    CHECK(got.value == doctest::Approx(best).epsilon(1e-6).scale(1.0));
    CHECK(got.argmin[0] >= 0.0);
    CHECK(got.argmin[0] <= u);
  }
  Functional tv = Functional::tv_1d(1.0);
  SubgradientPair t1 = select_pair(tv, make_vec({1, 0}));
  CHECK_THROWS_AS(infconv_bregman(tv, make_vec({1, 1}), t1, t1), Error);
}

TEST_CASE("tv prox agrees with the dual oracle") {
  SplitStream rng(41, 6);
  for (int trial = 0; trial < 12; ++trial) {
    Index n = 2 + static_cast<Index>(rng.below(18));
    Vec y = rng.gaussian_vec(n) * 2.0;
    double lam = 0.05 + 2.0 * rng.uniform();
    Vec direct = prox_tv1d(y, lam);
    Vec dual = tv_prox_dual_oracle(y, lam);
    CHECK((direct - dual).lpNorm<Eigen::Infinity>() <= 1e-7);
    // optimality gap of the direct solution
    Functional tv = Functional::tv_1d(1.0);
    double primal = 0.5 * (direct - y).squaredNorm() + lam * tv.eval(direct);
    double primal_dual = 0.5 * (dual - y).squaredNorm() + lam * tv.eval(dual);
    CHECK(primal <= primal_dual + 1e-9);
  }
  // plateaus and tiny sizes
  CHECK(prox_tv1d(make_vec({5}), 3.0)[0] == doctest::Approx(5.0));
  Vec c = prox_tv1d(make_vec({2, 2, 2}), 0.7);
  CHECK(c.isApproxToConstant(2.0, 1e-14));
}

TEST_CASE("prox maps satisfy their optimality conditions") {
  SplitStream rng(43, 5);
  Functional sq = Functional::squared_l2();
  Functional l1 = Functional::weighted_l1(make_vec({0.5, 2.0, 1.0}));
  Functional ent = Functional::boltzmann_entropy();
  for (int trial = 0; trial < 30; ++trial) {
    Vec f = rng.gaussian_vec(3) * 2.0;
    double tau = 0.1 + rng.uniform();
    CHECK(sq.prox(f, tau).isApprox(f / (1.0 + tau), 1e-14));
    Vec ul = l1.prox(f, tau);
    for (Index i = 0; i < 3; ++i) {
      double t = tau * l1.weights()[i];
      double expect = f[i] > t ? f[i] - t : (f[i] < -t ? f[i] + t : 0.0);
      CHECK(ul[i] == doctest::Approx(expect).epsilon(1e-14));
    }
    Vec ue = ent.prox(f, tau);
    for (Index i = 0; i < 3; ++i) {
      CHECK(ue[i] > 0.0);
      CHECK(tau * std::log(ue[i]) + ue[i] - f[i] == doctest::Approx(0.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("entropy evaluation conventions") {
  Functional ent = Functional::boltzmann_entropy();
  CHECK(ent.eval(make_vec({0, 0})) == doctest::Approx(2.0));  // 0 log 0 = 0
  CHECK(ent.in_domain(make_vec({0, 1})));
  CHECK_FALSE(ent.in_domain(make_vec({-0.1, 1})));
  CHECK(ent.conjugate(make_vec({0, 1})) == doctest::Approx(std::exp(1.0) - 1.0));
}
