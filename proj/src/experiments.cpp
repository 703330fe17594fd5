#include "rps_spde/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "output.hpp"
#include "rps_spde/allen_cahn.hpp"
#include "rps_spde/error.hpp"
#include "rps_spde/ihrie.hpp"
#include "rps_spde/malliavin.hpp"
#include "rps_spde/noise.hpp"
#include "rps_spde/semiflow.hpp"

namespace rps {

using detail::CsvFile;
using json = nlohmann::ordered_json;

DriftPtr make_drift(const ExperimentConfig& c) {
  const double a = c.drift_a, tau = c.ihrie.tau;
  if (c.drift == "zero") return make_zero_drift();
  if (c.drift == "constant") return make_constant_drift(a);
  if (c.drift == "sine") return make_sine_drift(a, tau);
  if (c.drift == "tanh-sine") return make_tanh_sine_drift(a, tau);
  if (c.drift == "allen-cahn") return make_allen_cahn_drift(a);
  if (c.drift == "linear") return make_linear_drift(a);
  fail(Errc::validation_error, "unknown drift.kind '" + c.drift + "'");
}

CocycleParams make_params(const ExperimentConfig& c) {
  SpectralBasis b = build_basis(c.domain, c.K_m);
  NoiseSpec n = NoiseSpec::from_rule(c.sigma_rule, c.K_m);
  return make_params(std::move(b), std::move(n), c.Lambda, c.N_trunc);
}

namespace {

struct Ctx {
  const ExperimentConfig& cfg;
  std::vector<std::string> files;
  json results = json::object();
  int exit_code = 0;

  std::string path(const std::string& name) {
    files.push_back(name);
    return detail::join_path(cfg.output_dir, name);
  }
};

double finite_or_nan(double x) { return std::isfinite(x) ? x : std::numeric_limits<double>::quiet_NaN(); }

std::vector<WienerGrid> frame_ensemble(const ExperimentConfig& c, const CocycleParams& p) {
  const IhrieLayout L = make_layout(c.ihrie);
  return sample_ensemble(p.noise, L.dt, L.t_min(), L.t_max(), c.n_samples, c.seed);
}

void write_history(Ctx& x, const std::vector<double>& h, const char* name) {
  CsvFile f(x.path(name), "iteration,weighted_diff");
  for (std::size_t i = 0; i < h.size(); ++i) std::fprintf(f.get(), "%zu,%.17g\n", i + 1, h[i]);
  f.close();
}

json solve_summary(const SolveResult& s) {
  json j;
  j["iterations"] = s.iterations;
  j["converged"] = s.converged;
  j["final_diff"] = s.history.empty() ? 0.0 : s.history.back();
  j["certificate_bound"] = finite_or_nan(certificate_bound(s.history));
  j["sup_F"] = s.sup_F;
  j["sup_gradF"] = s.sup_gradF;
  j["capped_nodes"] = s.capped_nodes;
  return j;
}

void basis_check(Ctx& x) {
  const CocycleParams p = make_params(x.cfg);
  const SpectralBasis& b = p.basis;
  CsvFile f(x.path("basis.csv"), "mode,mu,stable,max_orthonormality_residual");
  double worst = 0.0;
  for (int q = 0; q < b.K; ++q) {
    double r = 0.0;
    for (int l = 0; l < b.K; ++l) {
      double s = 0.0;
      for (int i = 0; i < b.n_x(); ++i) s += b.w[i] * b.mode(q)[i] * b.mode(l)[i];
      r = std::max(r, std::abs(s - (q == l ? 1.0 : 0.0)));
    }
    worst = std::max(worst, r);
    std::fprintf(f.get(), "%d,%.17g,%d,%.17g\n", q + 1, b.mu[q], b.stable(q) ? 1 : 0, r);
  }
  f.close();
  const ConditionBReport cb = check_condition_B(p.noise);
  x.results["K_m"] = b.K;
  x.results["m"] = b.m;
  x.results["spectral_gap"] = p.mu_gap;
  x.results["Lambda"] = p.Lambda;
  x.results["grad_constant"] = b.grad_constant;
  x.results["max_orthonormality_residual"] = worst;
  x.results["condition_B_partial_sum"] = cb.partial_sum;
  x.results["condition_B_non_summable"] = cb.non_summable;
}

void lyapunov(Ctx& x) {
  const CocycleParams p = make_params(x.cfg);
  const double T = x.cfg.lyapunov.T;
  const auto ens = sample_ensemble(p.noise, x.cfg.lyapunov.dt, -T, T, x.cfg.n_samples, x.cfg.seed);
  CsvFile f(x.path("lyapunov.csv"), "mode,mu,estimate,stderr_analytic,stderr_sample,n_samples");
  double worst_z = 0.0;
  for (int k = 1; k <= p.basis.K; ++k) {
    const LyapunovEstimate e = estimate_lyapunov(p, k, T, ens);
    std::fprintf(f.get(), "%d,%.17g,%.17g,%.17g,%.17g,%d\n", k, p.basis.mu[k - 1], e.estimate, e.stderr_analytic,
                 e.stderr_sample, e.n_samples);
    if (e.stderr_analytic > 0.0) worst_z = std::max(worst_z, std::abs(e.estimate - p.basis.mu[k - 1]) / e.stderr_analytic);
  }
  f.close();
  x.results["T"] = T;
  x.results["max_abs_z"] = worst_z;
}

void dichotomy(Ctx& x) {
  const CocycleParams p = make_params(x.cfg);
  const auto& d = x.cfg.dichotomy;
  std::vector<double> tg;
  for (int i = 1; i <= d.n_grid; ++i) {
    const double t = std::nearbyint(d.t_max * i / d.n_grid / d.dt) * d.dt;
    if (tg.empty() || t > tg.back()) tg.push_back(t);
  }
  double smax = 0.0;
  for (double s : d.s_values) smax = std::max(smax, std::abs(s));
  const double ext = smax + d.t_max;
  const auto ens = sample_ensemble(p.noise, d.dt, -ext, ext, x.cfg.n_samples, x.cfg.seed);
  const DichotomyReport rep = estimate_C_lambda(p, PathView(ens.front()), tg, d.s_values);
  write_dichotomy_csv(rep, x.path("dichotomy.csv"));
  write_dichotomy_json(rep, p, x.cfg.seed, x.path("dichotomy.json"));

  std::vector<double> C(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) C[i] = dichotomy_constant(p, PathView(ens[i]), tg);
  CsvFile f(x.path("c_lambda.csv"), "sample_id,C_Lambda");
  for (std::size_t i = 0; i < ens.size(); ++i)
    std::fprintf(f.get(), "%llu,%.17g\n", static_cast<unsigned long long>(ens[i].sample_id), C[i]);
  f.close();

  std::vector<double> shifts;
  for (double s : d.s_values)
    if (s != 0.0) shifts.push_back(s);
  const auto rows = temperedness_diagnostic(p, ens, shifts, tg);
  CsvFile g(x.path("temperedness.csv"), "s,mean_log_ratio");
  for (const auto& r : rows) std::fprintf(g.get(), "%.17g,%.17g\n", r.s, r.mean_log_ratio);
  g.close();
  x.results["C_Lambda_sample0"] = rep.C_Lambda;
  x.results["C1"] = rep.C1;
  x.results["C2"] = rep.C2;
  x.results["C_Lambda_max"] = *std::max_element(C.begin(), C.end());
}

void ihrie_solve(Ctx& x) {
  const CocycleParams p = make_params(x.cfg);
  const DriftPtr F = make_drift(x.cfg);
  const auto ens = frame_ensemble(x.cfg, p);
  const SolveResult s = solve_fixed_point(x.cfg.ihrie, p, ens, *F);
  write_solution_csv(s.Y, x.path("solution.csv"));
  write_history(x, s.history, "residual_history.csv");
  x.results = solve_summary(s);
  x.results["residual"] = residual(s.Y, x.cfg.ihrie, p, ens, *F);
  x.results["periodicity_gap"] = check_periodicity(s.Y, x.cfg.ihrie, p, ens, *F);
  x.results["weighted_norm_Y"] = weighted_norm(s.Y, p.Lambda);
  if (!s.converged) x.exit_code = 2;
}

void rps_verify(Ctx& x) {
  const CocycleParams p = make_params(x.cfg);
  const DriftPtr F = make_drift(x.cfg);
  const auto ens = frame_ensemble(x.cfg, p);
  const SolveResult s = solve_fixed_point(x.cfg.ihrie, p, ens, *F);
  write_history(x, s.history, "residual_history.csv");
  x.results["solve"] = solve_summary(s);
  if (!s.converged) x.exit_code = 2;
  MildSolverConfig flow;
  flow.scheme = parse_scheme(x.cfg.flow.scheme);
  std::vector<int> steps = x.cfg.flow.refine;
  if (steps.empty()) steps.push_back(static_cast<int>(std::nearbyint(x.cfg.ihrie.tau / x.cfg.flow.dt_flow)));
  CsvFile f(x.path("refinement.csv"), "steps_per_period,dt_flow,err_L2,sup_mean_sq_Y");
  json rows = json::array();
  for (int n : steps) {
    flow.dt_flow = x.cfg.ihrie.tau / n;
    const VerifyResult v = verify_rps(s.Y, p, ens, *F, flow, x.cfg.flow.t_stride,
                                      static_cast<std::size_t>(x.cfg.flow.max_samples));
    write_verification_csv(v, x.path("verification_" + std::to_string(n) + ".csv"));
    std::fprintf(f.get(), "%d,%.17g,%.17g,%.17g\n", n, flow.dt_flow, v.err_L2, v.sup_mean_sq_Y);
    rows.push_back({{"steps_per_period", n}, {"err_L2", v.err_L2}, {"sup_mean_sq_Y", v.sup_mean_sq_Y}});
  }
  f.close();
  x.results["refinement"] = rows;
  x.results["scheme"] = x.cfg.flow.scheme;
}

void malliavin(Ctx& x) {
  const CocycleParams p = make_params(x.cfg);
  const DriftPtr F = make_drift(x.cfg);
  const auto ens = frame_ensemble(x.cfg, p);
  MalliavinConfig mc;
  mc.r_min = x.cfg.malliavin.r_min;
  mc.r_max = x.cfg.malliavin.r_max;
  mc.r_stride = x.cfg.malliavin.r_stride;
  const DerivativeSolve ds = solve_with_derivative(x.cfg.ihrie, p, ens, *F, mc);
  x.results["solve"] = solve_summary(ds.solve);
  if (!ds.solve.converged) x.exit_code = 2;
  const SobolevStats st = malliavin_sobolev_stats(ds.DY, p.Lambda, x.cfg.malliavin.delta_steps);
  const KConstants kc = compute_K1_K2(p, x.cfg.ihrie.tau, {ds.solve.sup_F, ds.solve.sup_gradF});
  const RhoSolution rho = solve_rho(kc.K1, kc.K2, p.mu_gap, x.cfg.ihrie.tau, x.cfg.ihrie.n_t);
  write_malliavin_csv(st, rho, x.path("malliavin.csv"));
  write_equicontinuity_csv(st, x.path("equicontinuity.csv"));
  write_rho_csv(rho, x.path("rho.csv"));
  write_history(x, ds.dy_history, "derivative_history.csv");
  std::size_t ok = 0;
  for (std::size_t t = 0; t < st.D_norm.size(); ++t) ok += st.D_norm[t] <= rho.rho[t] ? 1 : 0;
  x.results["K1"] = kc.K1;
  x.results["K2"] = kc.K2;
  x.results["neumann_number"] = rho.neumann_number;
  x.results["neumann_ok"] = rho.neumann_ok;
  x.results["rho_min"] = *std::min_element(rho.rho.begin(), rho.rho.end());
  x.results["D_norm_max"] = *std::max_element(st.D_norm.begin(), st.D_norm.end());
  x.results["D_norm_below_rho_fraction"] = static_cast<double>(ok) / static_cast<double>(st.D_norm.size());
  x.results["boundary_flags"] = ds.boundary_flags;
  x.results["derivative_final_diff"] = ds.dy_history.empty() ? 0.0 : ds.dy_history.back();
  if (x.cfg.malliavin.shift_periods > 0) {
    const ShiftNormGap g = shift_norm_preservation(ds.solve.Y, ds.DY, x.cfg.malliavin.shift_periods * x.cfg.ihrie.n_t);
    x.results["shift_norm_rel_gap"] = g.rel_gap;
    x.results["shift_norm_max_z"] = finite_or_nan(g.max_z);
  }
}

void rho(Ctx& x) {
  const CocycleParams p = make_params(x.cfg);
  const DriftPtr F = make_drift(x.cfg);
  const auto ens = frame_ensemble(x.cfg, p);
  const SolveResult s = solve_fixed_point(x.cfg.ihrie, p, ens, *F);
  x.results["solve"] = solve_summary(s);
  if (!s.converged) x.exit_code = 2;
  const KConstants kc = compute_K1_K2(p, x.cfg.ihrie.tau, {s.sup_F, s.sup_gradF});
  const RhoSolution r = solve_rho(kc.K1, kc.K2, p.mu_gap, x.cfg.ihrie.tau, x.cfg.ihrie.n_t);
  write_rho_csv(r, x.path("rho.csv"));
  x.results["K1"] = kc.K1;
  x.results["K2"] = kc.K2;
  x.results["neumann_number"] = r.neumann_number;
  x.results["neumann_ok"] = r.neumann_ok;
  x.results["residual"] = r.residual;
  x.results["rcond"] = r.rcond;
  x.results["rho_min"] = *std::min_element(r.rho.begin(), r.rho.end());
  x.results["rho_max"] = *std::max_element(r.rho.begin(), r.rho.end());
}

void allen_cahn(Ctx& x) {
  const CocycleParams p = make_params(x.cfg);
  const auto ens = frame_ensemble(x.cfg, p);
  AllenCahnOptions opt;
  opt.N_cut = x.cfg.allen_cahn.N_cut;
  opt.M_diss = x.cfg.allen_cahn.M_diss;
  opt.L_diss = x.cfg.allen_cahn.L_diss;
  opt.forcing = x.cfg.allen_cahn.forcing;
  const AllenCahnResult r = run_allen_cahn(x.cfg.ihrie, p, ens, opt);
  write_l2_table_csv(r, x.path("l2_table.csv"));
  write_tail_csv(r, x.path("tail.csv"));
  json per = json::array();
  for (std::size_t k = 0; k < r.N_cut.size(); ++k) {
    json j = solve_summary(r.solves[k]);
    j["N_cut"] = r.N_cut[k];
    j["sup_mean_sq"] = r.sup_mean_sq[k];
    per.push_back(j);
  }
  x.results["per_N_cut"] = per;
  x.results["bound_2L_over_K"] = r.bound;
  x.results["K_rate"] = r.K_rate;
  x.results["coverage"] = r.coverage;
  x.results["consecutive_gap"] = r.consecutive_gap;
  x.results["stabilized_N_cut"] = r.stabilized_N;
  if (!r.converged) x.exit_code = 2;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
  const auto v = validate_config(cfg);
  if (!v.empty()) {
    std::string msg;
    for (std::size_t i = 0; i < v.size(); ++i) msg += (i ? "; " : "") + v[i];
    fail(Errc::validation_error, msg);
  }
  const auto t0 = std::chrono::steady_clock::now();
  detail::ensure_dir(cfg.output_dir);
  Ctx x{cfg, {}, json::object(), 0};
  try {
    const std::string& e = cfg.experiment;
    if (e == "basis-check") basis_check(x);
    else if (e == "lyapunov") lyapunov(x);
    else if (e == "dichotomy") dichotomy(x);
    else if (e == "ihrie-solve") ihrie_solve(x);
    else if (e == "rps-verify") rps_verify(x);
    else if (e == "malliavin") malliavin(x);
    else if (e == "rho") rho(x);
    else if (e == "allen-cahn") allen_cahn(x);
  } catch (const Error& err) {
    throw Error(err.code(), cfg.experiment + ": " + err.message());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  RunResult r;
  r.exit_code = x.exit_code;
  r.manifest_file = detail::join_path(cfg.output_dir, "manifest.json");
  detail::write_manifest(r.manifest_file, cfg, x.results, x.files, wall, x.exit_code);
  r.results_json = x.results.dump();
  return r;
}

}  // namespace rps
