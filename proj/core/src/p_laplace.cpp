#include "bregkit/p_laplace.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace bregkit {

namespace {

// element slopes including the boundary elements (u = 0 at both ends)
Vec element_slopes(const Mesh1D& mesh, const Vec& u) {
  const int m = mesh.m;
  const double h = mesh.h();
  Vec s(m);
  for (int e = 0; e < m; ++e) {
    double left = e == 0 ? 0.0 : u[e - 1];
    double right = e == m - 1 ? 0.0 : u[e];
    s[e] = (right - left) / h;
  }
  return s;
}

Vec load_vector(const PLaplaceProblem& prob, const Mesh1D& mesh) {
  const double h = mesh.h();
  Vec f(mesh.interior());
  for (Index j = 0; j < mesh.interior(); ++j) f[j] = prob.load((j + 1) * h);
  return f;
}

}  // namespace

double plaplace_gradient_energy(const PLaplaceProblem& prob, const Mesh1D& mesh, const Vec& u) {
  prob.validate();
  mesh.validate();
  require(u.size() == mesh.interior(), ErrorCode::MeshMismatch, "nodal vector size mismatch");
  Vec s = element_slopes(mesh, u);
  double j = 0.0;
  for (int e = 0; e < mesh.m; ++e) j += std::pow(std::abs(s[e]), prob.p);
  return mesh.h() * j / prob.p;
}

double plaplace_energy(const PLaplaceProblem& prob, const Mesh1D& mesh, const Vec& u) {
  double j = plaplace_gradient_energy(prob, mesh, u);
  Vec f = load_vector(prob, mesh);
  return j - mesh.h() * f.dot(u);  // trapezoid with zero boundary values
}

GalerkinSolution solve_galerkin(const PLaplaceProblem& prob, const Mesh1D& mesh, double tol,
                                int max_iter) {
  prob.validate();
  mesh.validate();
  const Index n = mesh.interior();
  const double h = mesh.h();
  const double p = prob.p;
  Vec fh = mesh.h() * load_vector(prob, mesh);

  auto gradient = [&](const Vec& u) {
    Vec s = element_slopes(mesh, u);
    Vec g(n);
    for (Index j = 0; j < n; ++j) {
      double sl = s[j], sr = s[j + 1];
      double fl = std::pow(std::abs(sl), p - 2.0) * sl;
      double fr = std::pow(std::abs(sr), p - 2.0) * sr;
      g[j] = fl - fr;  // h * (1/h) element chain factors cancel
    }
    return (g - fh).eval();
  };

  GalerkinSolution out;
  out.u = Vec::Zero(n);
  double energy = plaplace_energy(prob, mesh, out.u);
  Vec g = gradient(out.u);

  for (int it = 1; it <= max_iter; ++it) {
    out.grad_norm = g.norm();
    out.iterations = it - 1;
    if (out.grad_norm <= tol) {
      out.converged = true;
      return out;
    }
    // tridiagonal Hessian; elements with vanishing slope contribute nothing
    Vec s = element_slopes(mesh, out.u);
    Mat hess = Mat::Zero(n, n);
    for (int e = 0; e < mesh.m; ++e) {
      double w = (p - 1.0) * std::pow(std::abs(s[e]), p - 2.0) / h;
      Index left = e - 1, right = e;  // interior node indices touching element e
      if (left >= 0) hess(left, left) += w;
      if (right < n) hess(right, right) += w;
      if (left >= 0 && right < n) {
        hess(left, right) -= w;
        hess(right, left) -= w;
      }
    }
    Vec d = Eigen::LDLT<Mat>(hess).solve(-g);
    if (!all_finite(d) || d.dot(g) >= 0.0) {
      // degenerate elements (p > 2 at zero slope) break definiteness
      double ridge = 1e-10 * std::max(1.0, hess.diagonal().maxCoeff()) + 1e-14;
      hess.diagonal().array() += ridge;
      d = Eigen::LDLT<Mat>(hess).solve(-g);
      if (!all_finite(d) || d.dot(g) >= 0.0) d = -g;
    }

    double slope = g.dot(d);
    if (-slope <= 1e-14 * (1.0 + std::abs(energy))) {
      // predicted decrease below energy resolution: pure Newton endgame
      out.u += d;
      energy = plaplace_energy(prob, mesh, out.u);
      g = gradient(out.u);
      continue;
    }
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Vec cand = out.u + step * d;
      double cand_energy = plaplace_energy(prob, mesh, cand);
      if (cand_energy <= energy + 1e-4 * step * slope) {
        out.u = cand;
        energy = cand_energy;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    require(accepted, ErrorCode::NonConvergence, "line search failed");
    g = gradient(out.u);
  }
  out.grad_norm = g.norm();
  out.iterations = max_iter;
  out.converged = out.grad_norm <= tol;
  return out;
}

Vec prolong(const Vec& u_coarse, const Mesh1D& coarse, const Mesh1D& fine) {
  coarse.validate();
  fine.validate();
  require(u_coarse.size() == coarse.interior(), ErrorCode::MeshMismatch, "coarse vector mismatch");
  require(fine.m % coarse.m == 0, ErrorCode::MeshMismatch, "meshes are not nested");
  const int ratio = fine.m / coarse.m;
  Vec out(fine.interior());
  auto coarse_val = [&](int node) {  // coarse node index 0..m
    if (node <= 0 || node >= coarse.m) return 0.0;
    return u_coarse[node - 1];
  };
  for (Index j = 1; j < fine.m; ++j) {
    int block = static_cast<int>(j) / ratio;
    int off = static_cast<int>(j) % ratio;
    double frac = static_cast<double>(off) / ratio;
    out[j - 1] = (1.0 - frac) * coarse_val(block) + frac * coarse_val(block + 1);
  }
  return out;
}

ProjectionTable bregman_projection_check(const PLaplaceProblem& prob, const Mesh1D& coarse,
                                         const Mesh1D& fine, const Vec& u_ref, const Vec& u_h,
                                         const std::vector<Vec>& candidates, double base_tol) {
  prob.validate();
  require(fine.m >= 8 * coarse.m, ErrorCode::MeshMismatch,
          "reference mesh must be at least 8x finer");
  require(u_ref.size() == fine.interior(), ErrorCode::MeshMismatch, "reference size mismatch");
  require(u_h.size() == coarse.interior(), ErrorCode::MeshMismatch, "solution size mismatch");

  Vec f_fine = Vec(fine.interior());
  for (Index j = 0; j < fine.interior(); ++j) f_fine[j] = prob.load((j + 1) * fine.h());
  double j_ref = plaplace_gradient_energy(prob, fine, u_ref);
  double load_ref = fine.h() * f_fine.dot(u_ref);

  auto d_value = [&](const Vec& w_fine) {
    return plaplace_gradient_energy(prob, fine, w_fine) - j_ref -
           (fine.h() * f_fine.dot(w_fine) - load_ref);
  };

  // reference-discretization error observed as the increment from the
  // half-resolution reference
  require(fine.m % 2 == 0, ErrorCode::MeshMismatch, "fine mesh must have even element count");
  Mesh1D half{fine.m / 2};
  GalerkinSolution ref_half = solve_galerkin(prob, half, 1e-12, 400);
  double increment = std::abs(d_value(prolong(ref_half.u, half, fine)));

  ProjectionTable table;
  table.tol_ref = base_tol + increment;
  table.d_solution = d_value(prolong(u_h, coarse, fine));
  table.rows.push_back(ProjectionRow{-1, table.d_solution, true});
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    require(candidates[c].size() == coarse.interior(), ErrorCode::MeshMismatch,
            "candidate size mismatch");
    double d = d_value(prolong(candidates[c], coarse, fine));
    bool ok = table.d_solution <= d + table.tol_ref;
    table.all_passed = table.all_passed && ok;
    table.rows.push_back(ProjectionRow{static_cast<int>(c), d, ok});
  }
  return table;
}

}  // namespace bregkit
