// bregkit command line front end: runs every experiment from flags or a
// JSON config and writes CSV/JSON reports plus a manifest per run.
//
// Exit codes: 0 success, 1 usage/IO errors, 2 numerical assertion or bound
// violations. All failures are reported as a single JSON object on stdout.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bregkit/bregman_iteration.hpp"
#include "bregkit/entropic_transport.hpp"
#include "bregkit/fokker_planck.hpp"
#include "bregkit/functional.hpp"
#include "bregkit/inverse_scale_space.hpp"
#include "bregkit/io.hpp"
#include "bregkit/linop.hpp"
#include "bregkit/p_laplace.hpp"
#include "bregkit/rng.hpp"
#include "bregkit/uq.hpp"
#include "bregkit/variational.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace bregkit;

namespace {

constexpr const char* kVersion = "0.1.0";

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IOError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::MeshMismatch:
    case ErrorCode::UnsupportedFunctional:
    case ErrorCode::TooLarge:
    case ErrorCode::DomainError:
    case ErrorCode::EmptySupport:
      return 1;
    default:
      return 2;
  }
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

struct RunContext {
  std::string out_dir;
  json config_echo;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;

  std::string path(const std::string& name) {
    outputs.push_back(name);
    return (fs::path(out_dir) / name).string();
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream f(path(name));
    if (!f.good()) throw Error(ErrorCode::IOError, "cannot write " + name);
    f << j.dump(2) << "\n";
  }

  void finish(const std::string& command, double wall_seconds) {
    json manifest;
    manifest["toolkit_version"] = kVersion;
    manifest["command"] = command;
    manifest["config"] = config_echo;
    manifest["seed"] = seed;
    manifest["wall_time_s"] = wall_seconds;
    manifest["outputs"] = outputs;
    std::ofstream f((fs::path(out_dir) / "manifest.json").string());
    if (!f.good()) throw Error(ErrorCode::IOError, "cannot write manifest.json");
    f << manifest.dump(2) << "\n";
  }
};

LinOp parse_operator(const std::string& spec) {
  if (spec.rfind("identity:", 0) == 0) {
    long n = std::strtol(spec.c_str() + 9, nullptr, 10);
    require(n >= 1, ErrorCode::InvalidArgument, "identity size must be >= 1");
    return LinOp::identity(n);
  }
  return LinOp(read_matrix_csv(spec));
}

Functional parse_functional(const std::string& kind, const std::string& weights_path, Index n,
                            double h) {
  if (kind == "sq") return Functional::squared_l2();
  if (kind == "ent") return Functional::boltzmann_entropy();
  if (kind == "tv") return Functional::tv_1d(h);
  if (kind == "l1") {
    if (weights_path.empty()) return Functional::weighted_l1(Vec::Ones(n));
    return Functional::weighted_l1(read_vector_csv(weights_path));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown functional kind '" + kind + "'");
}

SignedSupport parse_support(const std::string& spec) {
  // "0:+1,7:-1" or "0:+,7:-"
  SignedSupport ss;
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) {
    auto colon = item.find(':');
    require(colon != std::string::npos, ErrorCode::InvalidArgument,
            "support entries look like index:sign");
    ss.indices.push_back(std::stol(item.substr(0, colon)));
    std::string sign = item.substr(colon + 1);
    ss.signs.push_back(sign == "-" || sign == "-1" ? -1 : 1);
  }
  require(!ss.indices.empty(), ErrorCode::InvalidArgument, "empty support spec");
  return ss;
}

std::vector<double> parse_double_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) out.push_back(std::stod(item));
  return out;
}

SpectralFilter parse_filter(const std::string& spec) {
  if (spec == "ones") return SpectralFilter::constant(1.0);
  if (spec == "zeros") return SpectralFilter::constant(0.0);
  if (spec.rfind("cutoff:", 0) == 0) return SpectralFilter::cutoff_below(std::stod(spec.substr(7)));
  if (spec.rfind("band:", 0) == 0) {
    auto vals = parse_double_list(spec.substr(5));
    require(vals.size() == 2, ErrorCode::InvalidArgument, "band filter needs two times");
    return SpectralFilter::band(vals[0], vals[1]);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown filter '" + spec + "'");
}

std::function<double(double)> parse_load(const std::string& spec) {
  if (spec.rfind("const:", 0) == 0) {
    double c = std::stod(spec.substr(6));
    return [c](double) { return c; };
  }
  // CSV samples interpreted as a piecewise-linear function on [0,1]
  Vec samples = read_vector_csv(spec);
  return [samples](double x) {
    Index n = samples.size();
    if (n == 1) return samples[0];
    double pos = std::clamp(x, 0.0, 1.0) * (n - 1);
    Index lo = std::min<Index>(static_cast<Index>(pos), n - 2);
    double frac = pos - lo;
    return (1.0 - frac) * samples[lo] + frac * samples[lo + 1];
  };
}

void require_set(const std::string& value, const std::string& flag) {
  require(!value.empty(), ErrorCode::InvalidArgument,
          flag + " is required (flag or config file)");
}

void write_report_csv(const std::string& path, const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path);
  if (!f.good()) throw Error(ErrorCode::IOError, "cannot write " + path);
  f << header << "\n";
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) f << ',';
      f << format_double(row[j]);
    }
    f << "\n";
  }
}

// ---- subcommand bodies ----------------------------------------------------

int run_bregman(RunContext& ctx, const std::string& kind, const std::string& weights,
                const std::string& u_path, const std::string& v_path, double h) {
  require_set(u_path, "--u");
  require_set(v_path, "--v");
  Vec u = read_vector_csv(u_path);
  Vec v = read_vector_csv(v_path);
  Functional J = parse_functional(kind, weights, u.size(), h);
  SubgradientPair pu = select_pair(J, u);
  SubgradientPair pv = select_pair(J, v);
  json out;
  out["functional"] = kind;
  out["value"] = bregman(J, v, pu);
  out["reverse_value"] = bregman(J, u, pv);
  out["symmetric"] = symmetric_bregman(J, pu, pv);
  out["dual_residual"] = dual_bregman_residual(J, pu, pv);
  ctx.write_json("bregman.json", out);
  return 0;
}

int run_solve(RunContext& ctx, const std::string& op_spec, const std::string& f_path, double alpha,
              const std::string& kind, const std::string& weights, double h, double tol,
              int max_iter) {
  require_set(f_path, "--f");
  LinOp K = parse_operator(op_spec);
  Vec f = read_vector_csv(f_path);
  Functional R = parse_functional(kind, weights, K.cols(), h);
  RegSolution sol = solve(RegProblem{K, f, alpha, R}, tol, max_iter);
  write_vector_csv(ctx.path("solution.csv"), sol.u);
  write_vector_csv(ctx.path("dual_witness.csv"), sol.w);
  json out;
  out["objective"] = sol.objective;
  out["kkt_residual"] = sol.kkt_residual;
  out["certified"] = sol.certified;
  out["iterations"] = sol.iterations;
  ctx.write_json("solve.json", out);
  return sol.certified ? 0 : 2;
}

int run_biter(RunContext& ctx, const std::string& op_spec, const std::string& f_path, double alpha,
              const std::string& kind, const std::string& weights, double h, double delta,
              double tau, int fixed_n, int max_iter, double tol, const std::string& truth_path) {
  require_set(f_path, "--f");
  LinOp K = parse_operator(op_spec);
  Vec f = read_vector_csv(f_path);
  Functional R = parse_functional(kind, weights, K.cols(), h);
  StoppingRule stop =
      fixed_n > 0 ? StoppingRule::fixed_iterations(fixed_n) : StoppingRule::discrepancy(delta, tau);
  BregmanRun run = bregman_run(K, f, alpha, R, stop, max_iter, tol);

  bool have_truth = !truth_path.empty();
  Vec truth;
  if (have_truth) truth = read_vector_csv(truth_path);
  std::vector<std::vector<double>> rows;
  for (const auto& s : run.history) {
    std::vector<double> row = {static_cast<double>(s.k), s.residual, R.eval(s.u)};
    if (have_truth) row.push_back(R.eval(truth) - R.eval(s.u) - s.p.dot(truth - s.u));
    rows.push_back(row);
  }
  write_report_csv(ctx.path("history.csv"),
                   have_truth ? "k,residual,R_value,bregman_to_truth" : "k,residual,R_value",
                   rows);
  write_vector_csv(ctx.path("u_final.csv"), run.history.back().u);
  json out;
  out["converged"] = run.converged;
  out["stopped_k"] = run.history.back().k;
  out["final_residual"] = run.history.back().residual;
  ctx.write_json("biter.json", out);
  return run.converged ? 0 : 2;
}

int run_iss(RunContext& ctx, const std::string& op_spec, const std::string& f_path,
            int max_breakpoints, const std::string& filter_spec) {
  require_set(f_path, "--f");
  LinOp K = parse_operator(op_spec);
  Vec f = read_vector_csv(f_path);
  ISSTrajectory traj = iss_solve(K, f, max_breakpoints);

  json tj;
  tj["terminal"] = traj.terminal;
  tj["breakpoints"] = traj.breakpoints;
  tj["states"] = json::array();
  tj["duals"] = json::array();
  tj["slopes"] = json::array();
  tj["supports"] = json::array();
  for (std::size_t k = 0; k < traj.breakpoints.size(); ++k) {
    tj["states"].push_back(vec_to_json(traj.states[k]));
    tj["duals"].push_back(vec_to_json(traj.duals[k]));
    tj["slopes"].push_back(vec_to_json(traj.slopes[k]));
    tj["supports"].push_back(traj.supports[k]);
  }
  ctx.write_json("trajectory.json", tj);

  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < traj.breakpoints.size(); ++k) {
    std::vector<double> row = {traj.breakpoints[k]};
    for (Index i = 0; i < traj.states[k].size(); ++i) row.push_back(traj.states[k][i]);
    rows.push_back(row);
  }
  std::string header = "t";
  for (Index i = 0; i < K.cols(); ++i) header += ",u_" + std::to_string(i + 1);
  write_report_csv(ctx.path("trajectory.csv"), header, rows);

  if (!filter_spec.empty()) {
    Vec filtered = spectral_filter(traj, parse_filter(filter_spec));
    write_vector_csv(ctx.path("filtered.csv"), filtered);
  }
  json out;
  out["terminal"] = traj.terminal;
  out["breakpoint_count"] = traj.breakpoints.size() - 1;
  out["final_time"] = traj.breakpoints.back();
  ctx.write_json("iss.json", out);
  return 0;
}

int run_fp(RunContext& ctx, double length, int cells, const std::string& topology,
           const std::string& force_spec, double dt, double t_end, const std::string& u0_path) {
  require(topology == "periodic" || topology == "interval", ErrorCode::InvalidArgument,
          "topology is 'periodic' or 'interval'");
  Grid1D grid{length, cells, topology == "periodic" ? Topology::Periodic : Topology::NoFlux};
  FPProblem prob = [&] {
    try {
      std::size_t used = 0;
      double c = std::stod(force_spec, &used);
      if (used == force_spec.size()) return FPProblem::constant_force(grid, c);
    } catch (const std::invalid_argument&) {
    }
    return FPProblem{grid, read_vector_csv(force_spec)};
  }();

  GridFunction stationary = steady_state(prob);
  write_vector_csv(ctx.path("steady.csv"), stationary.values);

  GridFunction u0{grid, Vec()};
  if (!u0_path.empty()) {
    u0.values = read_vector_csv(u0_path);
  } else {
    // default start: single-mode perturbation of the uniform density
    Vec v(cells);
    for (int i = 0; i < cells; ++i)
      v[i] = 1.0 + 0.1 * std::sin(2.0 * M_PI * (i + 0.5) / cells);
    u0.values = v / (v.sum() * grid.h());
  }

  auto states = evolve(prob, u0, dt, t_end);
  double mass_drift = 0.0;
  for (const auto& s : states) mass_drift = std::max(mass_drift, std::abs(s.mass() - 1.0));
  DissipationReport rep = dissipation_report(states, stationary, dt);

  std::vector<std::vector<double>> rows;
  for (const auto& r : rep.rows) rows.push_back({r.t, r.entropy, r.dissipation});
  write_report_csv(ctx.path("dissipation.csv"), "t,entropy,dissipation", rows);
  write_vector_csv(ctx.path("final_state.csv"), states.back().values);

  json out;
  out["mass_drift"] = mass_drift;
  out["tail_rate"] = rep.tail_rate;
  out["fit_points"] = rep.fit_points;
  out["entropy_initial"] = rep.rows.front().entropy;
  out["entropy_final"] = rep.rows.back().entropy;
  ctx.write_json("fp.json", out);
  return 0;
}

int run_galerkin(RunContext& ctx, double p, int m, int m_fine, const std::string& load_spec,
                 int candidates, double noise_scale, std::uint64_t seed, double base_tol) {
  PLaplaceProblem prob{p, parse_load(load_spec)};
  Mesh1D coarse{m}, fine{m_fine};
  GalerkinSolution uh = solve_galerkin(prob, coarse, 1e-12, 400);
  GalerkinSolution uref = solve_galerkin(prob, fine, 1e-12, 600);
  require(uh.converged && uref.converged, ErrorCode::NonConvergence,
          "Galerkin solves missed the gradient tolerance");

  SplitStream rng(seed, 0);
  std::vector<Vec> cands;
  for (int c = 0; c < candidates; ++c)
    cands.push_back(uh.u + noise_scale * rng.gaussian_vec(coarse.interior()));
  ProjectionTable table =
      bregman_projection_check(prob, coarse, fine, uref.u, uh.u, cands, base_tol);

  std::vector<std::vector<double>> rows;
  for (const auto& r : table.rows)
    rows.push_back({static_cast<double>(r.candidate), r.d_value, r.passed ? 1.0 : 0.0});
  write_report_csv(ctx.path("projection.csv"), "candidate,d_value,passed", rows);
  write_vector_csv(ctx.path("u_coarse.csv"), uh.u);

  json out;
  out["d_solution"] = table.d_solution;
  out["tol_ref"] = table.tol_ref;
  out["all_passed"] = table.all_passed;
  out["solution_grad_norm"] = uh.grad_norm;
  ctx.write_json("galerkin.json", out);
  return table.all_passed ? 0 : 2;
}

int run_sinkhorn(RunContext& ctx, const std::string& mu_path, const std::string& nu_path,
                 const std::string& c_path, double eps, double tol, int max_iter,
                 double anneal_from) {
  require_set(mu_path, "--mu");
  require_set(nu_path, "--nu");
  require_set(c_path, "--C");
  DiscreteMeasure mu{read_vector_csv(mu_path)};
  DiscreteMeasure nu{read_vector_csv(nu_path)};
  Mat c = read_matrix_csv(c_path);
  TransportPlan plan = sinkhorn(mu, nu, c, eps, tol, max_iter, anneal_from);
  write_matrix_csv(ctx.path("plan.csv"), plan.plan);
  json out;
  out["cost"] = plan.cost;
  out["kl_objective"] = plan.kl_objective;
  out["iterations"] = plan.iterations;
  out["residuals"] = {plan.row_residual, plan.col_residual};
  out["eps"] = plan.eps;
  ctx.write_json("sinkhorn.json", out);
  return 0;
}

int run_uq(RunContext& ctx, const std::string& op_spec, const std::string& support_spec,
           double sigma, const std::string& alpha_spec, int samples, std::uint64_t seed,
           double margin, double tol) {
  LinOp K = parse_operator(op_spec);
  SourceTriple triple = make_source_triple(K, parse_support(support_spec), seed, margin);
  NoiseModel noise{sigma, seed};
  double alpha = alpha_spec == "opt" ? optimal_alpha(K, triple, sigma) : std::stod(alpha_spec);
  MCReport rep = expected_bound_check(K, triple, noise, alpha, samples, tol);
  json out;
  out["seed"] = rep.seed;
  out["n_samples"] = rep.samples;
  out["sigma"] = rep.sigma;
  out["alpha"] = rep.alpha;
  out["M"] = rep.m;
  out["mean_bregman"] = rep.mean_bregman;
  out["ci"] = rep.ci_halfwidth;
  out["bound"] = rep.bound;
  out["lhs_mean"] = rep.three_term_lhs_mean;
  out["rhs"] = rep.three_term_rhs;
  out["pass"] = rep.pass;
  ctx.write_json("uq.json", out);
  return rep.pass ? 0 : 2;
}

int run_rate(RunContext& ctx, const std::string& op_spec, const std::string& support_spec,
             const std::string& deltas_spec, double c_rule, double alpha_floor,
             std::uint64_t seed, double margin, double tol) {
  LinOp K = parse_operator(op_spec);
  SourceTriple triple = make_source_triple(K, parse_support(support_spec), seed, margin);
  std::vector<double> deltas = parse_double_list(deltas_spec);
  auto rows = rate_study(
      K, triple, deltas, [&](double d) { return std::max(c_rule * d, alpha_floor); }, seed, tol);
  std::vector<std::vector<double>> csv;
  for (const auto& r : rows)
    csv.push_back({r.delta, r.alpha, r.bregman_distance, r.bound, r.residual_norm});
  write_report_csv(ctx.path("rate.csv"), "delta,alpha,bregman_distance,bound,residual_norm", csv);
  json out;
  out["rows"] = rows.size();
  out["margin"] = triple.margin;
  ctx.write_json("rate.json", out);
  return 0;
}

// apply config-file defaults for options not given on the command line
void apply_config(CLI::App* sub, const json& cfg) {
  for (auto& [key, value] : cfg.items()) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || opt->count() > 0) continue;
    std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    opt->add_result(text);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bregkit: Bregman-distance toolkit batch runner"};
  app.require_subcommand(1);
  app.fallthrough(true);  // --out/--config may follow the subcommand

  std::string out_dir = "out";
  std::string config_path;
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--config", config_path, "JSON config file (flags override)");

  // shared option storage
  std::string op_spec = "identity:2", f_path, kind = "l1", weights, u_path, v_path;
  std::string truth_path, filter_spec, force_spec = "0", topology = "periodic";
  std::string mu_path, nu_path, c_path, support_spec = "0:+1", alpha_spec = "opt";
  std::string deltas_spec = "0.2,0.1,0.05", load_spec = "const:1", u0_path;
  double alpha = 1.0, h = 1.0, tol = 1e-10, delta = 0.0, tau = 1.0;
  double length = 1.0, dt = 1e-4, t_end = 0.1, eps = 0.1, anneal_from = 0.0;
  double p_exp = 2.0, noise_scale = 0.1, base_tol = 1e-6, sigma = 0.1;
  double c_rule = 1.0, alpha_floor = 1e-6, margin = 0.1;
  int max_iter = 200000, fixed_n = 0, max_breakpoints = 1000, cells = 64;
  int m_coarse = 16, m_fine = 256, candidates = 100, samples = 1000;
  std::uint64_t seed = 0;

  CLI::App* cmd_bregman = app.add_subcommand("bregman", "Bregman distance between two points");
  cmd_bregman->add_option("--functional", kind, "sq|l1|ent|tv");
  cmd_bregman->add_option("--weights", weights, "weights CSV for l1");
  cmd_bregman->add_option("--u", u_path, "base point CSV");
  cmd_bregman->add_option("--v", v_path, "evaluation point CSV");
  cmd_bregman->add_option("--spacing", h, "grid spacing for tv");

  CLI::App* cmd_solve = app.add_subcommand("solve", "variational regularization solve");
  cmd_solve->add_option("--K", op_spec, "identity:N or matrix CSV");
  cmd_solve->add_option("--f", f_path, "data CSV");
  cmd_solve->add_option("--alpha", alpha, "regularization weight");
  cmd_solve->add_option("--R", kind, "sq|l1|tv");
  cmd_solve->add_option("--weights", weights, "weights CSV for l1");
  cmd_solve->add_option("--spacing", h, "grid spacing for tv");
  cmd_solve->add_option("--tol", tol, "KKT tolerance");
  cmd_solve->add_option("--max-iter", max_iter, "iteration budget");

  CLI::App* cmd_biter = app.add_subcommand("biter", "Bregman iteration with stopping rule");
  cmd_biter->add_option("--K", op_spec, "identity:N or matrix CSV");
  cmd_biter->add_option("--f", f_path, "data CSV");
  cmd_biter->add_option("--alpha", alpha, "regularization weight");
  cmd_biter->add_option("--R", kind, "sq|l1|tv");
  cmd_biter->add_option("--weights", weights, "weights CSV for l1");
  cmd_biter->add_option("--spacing", h, "grid spacing for tv");
  cmd_biter->add_option("--delta", delta, "noise level estimate");
  cmd_biter->add_option("--tau", tau, "discrepancy safeguard");
  cmd_biter->add_option("--iterations", fixed_n, "fixed iteration count (overrides discrepancy)");
  cmd_biter->add_option("--max-iter", max_iter, "iteration cap");
  cmd_biter->add_option("--tol", tol, "inner solver tolerance");
  cmd_biter->add_option("--truth", truth_path, "ground truth CSV for distance tracking");

  CLI::App* cmd_iss = app.add_subcommand("iss", "inverse scale space trajectory and filter");
  cmd_iss->add_option("--K", op_spec, "identity:N or matrix CSV");
  cmd_iss->add_option("--f", f_path, "data CSV");
  cmd_iss->add_option("--max-breakpoints", max_breakpoints, "breakpoint budget");
  cmd_iss->add_option("--filter", filter_spec, "ones|zeros|cutoff:T|band:A,B");

  CLI::App* cmd_fp = app.add_subcommand("fp", "Fokker-Planck entropy decay run");
  cmd_fp->add_option("--L", length, "domain length");
  cmd_fp->add_option("--n", cells, "cell count");
  cmd_fp->add_option("--topology", topology, "periodic|interval");
  cmd_fp->add_option("--force", force_spec, "constant value or face CSV");
  cmd_fp->add_option("--dt", dt, "time step");
  cmd_fp->add_option("--T", t_end, "final time");
  cmd_fp->add_option("--u0", u0_path, "initial density CSV (default: perturbed uniform)");

  CLI::App* cmd_galerkin = app.add_subcommand("galerkin", "p-Laplace Bregman projection check");
  cmd_galerkin->add_option("--p", p_exp, "exponent p >= 2");
  cmd_galerkin->add_option("--m", m_coarse, "coarse element count");
  cmd_galerkin->add_option("--m-fine", m_fine, "reference element count");
  cmd_galerkin->add_option("--load", load_spec, "const:c or nodal CSV");
  cmd_galerkin->add_option("--candidates", candidates, "random candidate count");
  cmd_galerkin->add_option("--noise-scale", noise_scale, "candidate perturbation scale");
  cmd_galerkin->add_option("--seed", seed, "candidate RNG seed");
  cmd_galerkin->add_option("--tol-base", base_tol, "base tolerance for the inequality");

  CLI::App* cmd_sinkhorn = app.add_subcommand("sinkhorn", "entropic optimal transport");
  cmd_sinkhorn->add_option("--mu", mu_path, "row marginal CSV");
  cmd_sinkhorn->add_option("--nu", nu_path, "column marginal CSV");
  cmd_sinkhorn->add_option("--C", c_path, "cost matrix CSV");
  cmd_sinkhorn->add_option("--eps", eps, "entropic regularization");
  cmd_sinkhorn->add_option("--tol", tol, "marginal residual tolerance");
  cmd_sinkhorn->add_option("--max-iter", max_iter, "sweep budget");
  cmd_sinkhorn->add_option("--anneal-from", anneal_from, "warm-start epsilon ladder top (0 = off)");

  CLI::App* cmd_uq = app.add_subcommand("uq", "Monte-Carlo expected-Bregman bound check");
  cmd_uq->add_option("--K", op_spec, "identity:N or matrix CSV");
  cmd_uq->add_option("--support", support_spec, "signed support, e.g. 0:+1,3:-1");
  cmd_uq->add_option("--sigma", sigma, "noise standard deviation");
  cmd_uq->add_option("--alpha", alpha_spec, "numeric value or 'opt'");
  cmd_uq->add_option("--samples", samples, "Monte-Carlo sample count");
  cmd_uq->add_option("--seed", seed, "noise stream seed");
  cmd_uq->add_option("--margin", margin, "required source-condition margin");
  cmd_uq->add_option("--tol", tol, "per-sample solver tolerance");

  CLI::App* cmd_rate = app.add_subcommand("rate", "source-condition rate study");
  cmd_rate->add_option("--K", op_spec, "identity:N or matrix CSV");
  cmd_rate->add_option("--support", support_spec, "signed support, e.g. 0:+1,3:-1");
  cmd_rate->add_option("--deltas", deltas_spec, "comma-separated noise levels");
  cmd_rate->add_option("--c", c_rule, "alpha rule slope: alpha = max(c*delta, floor)");
  cmd_rate->add_option("--alpha-floor", alpha_floor, "alpha floor for delta = 0");
  cmd_rate->add_option("--seed", seed, "noise direction seed");
  cmd_rate->add_option("--margin", margin, "required source-condition margin");
  cmd_rate->add_option("--tol", tol, "solver tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    json err;
    err["error"] = "UsageError";
    err["message"] = e.what();
    std::cout << err.dump() << "\n";
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto started = std::chrono::steady_clock::now();
  try {
    if (!config_path.empty()) {
      std::ifstream cf(config_path);
      if (!cf.good()) throw Error(ErrorCode::IOError, "cannot open config " + config_path);
      json cfg = json::parse(cf, nullptr, true, true);
      apply_config(sub, cfg);
      if (cfg.contains("out") && app.get_option("--out")->count() == 0)
        out_dir = cfg["out"].get<std::string>();
    }

    fs::create_directories(out_dir);
    RunContext ctx;
    ctx.out_dir = out_dir;
    ctx.seed = seed;
    for (int i = 0; i < argc; ++i) ctx.config_echo.push_back(argv[i]);

    int code = 0;
    const std::string name = sub->get_name();
    if (name == "bregman") {
      code = run_bregman(ctx, kind, weights, u_path, v_path, h);
    } else if (name == "solve") {
      code = run_solve(ctx, op_spec, f_path, alpha, kind, weights, h, tol, max_iter);
    } else if (name == "biter") {
      code = run_biter(ctx, op_spec, f_path, alpha, kind, weights, h, delta, tau, fixed_n,
                       max_iter, tol, truth_path);
    } else if (name == "iss") {
      code = run_iss(ctx, op_spec, f_path, max_breakpoints, filter_spec);
    } else if (name == "fp") {
      code = run_fp(ctx, length, cells, topology, force_spec, dt, t_end, u0_path);
    } else if (name == "galerkin") {
      code = run_galerkin(ctx, p_exp, m_coarse, m_fine, load_spec, candidates, noise_scale, seed,
                          base_tol);
    } else if (name == "sinkhorn") {
      code = run_sinkhorn(ctx, mu_path, nu_path, c_path, eps, tol, max_iter, anneal_from);
    } else if (name == "uq") {
      code = run_uq(ctx, op_spec, support_spec, sigma, alpha_spec, samples, seed, margin, tol);
    } else if (name == "rate") {
      code = run_rate(ctx, op_spec, support_spec, deltas_spec, c_rule, alpha_floor, seed, margin,
                      tol);
    }

    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    ctx.finish(name, wall);
    if (code != 0) {
      json err;
      err["error"] = "CheckFailed";
      err["message"] = "a numerical check reported failure; see " + out_dir;
      std::cout << err.dump() << "\n";
    }
    return code;
  } catch (const Error& e) {
    json err;
    err["error"] = error_code_name(e.code());
    err["message"] = e.what();
    std::cout << err.dump() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    json err;
    err["error"] = "InternalError";
    err["message"] = e.what();
    std::cout << err.dump() << "\n";
    return 1;
  }
}
