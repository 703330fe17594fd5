#include "rps_spde/ihrie.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Dense>

#include "kernel.hpp"
#include "parallel.hpp"
#include "rps_spde/error.hpp"

namespace rps {

using detail::Frame;

IhrieLayout make_layout(const IhrieConfig& cfg) {
  if (!(cfg.tau > 0.0)) fail(Errc::invalid_argument, "tau must be > 0");
  if (cfg.n_t < 1) fail(Errc::invalid_argument, "n_t must be >= 1");
  IhrieLayout L;
  L.n_t = cfg.n_t;
  L.dt = cfg.dt();
  L.n_w = grid_index(cfg.T_win, L.dt, "T_win");
  if (L.n_w < 1) fail(Errc::invalid_argument, "T_win must cover at least one grid step");
  L.lo = -(static_cast<std::int64_t>(cfg.n_t) + L.n_w);
  L.hi = 2 * static_cast<std::int64_t>(cfg.n_t) + L.n_w;
  return L;
}

double window_tail(const IhrieConfig& cfg, double mu) { return std::exp(-0.5 * mu * cfg.T_win); }

std::vector<std::string> validate(const IhrieConfig& cfg, double mu) {
  std::vector<std::string> v;
  if (!(cfg.tau > 0.0)) v.push_back("ihrie.tau must be > 0");
  if (cfg.n_t < 16) v.push_back("ihrie.n_t = " + std::to_string(cfg.n_t) + ": need n_t >= 16 grid steps per period with dt = tau/n_t (dt | tau)");
  if (!(cfg.T_win > 0.0)) v.push_back("ihrie.T_win must be > 0");
  if (cfg.tau > 0.0 && cfg.n_t >= 1 && cfg.T_win > 0.0) {
    const double r = cfg.T_win / cfg.dt();
    if (std::abs(r - std::nearbyint(r)) > 1e-9)
      v.push_back("ihrie.T_win must be a multiple of dt = tau/n_t (dt | T_win)");
  }
  if (!(cfg.fp_tol > 0.0)) v.push_back("ihrie.fp_tol must be > 0");
  if (cfg.max_iters < 1) v.push_back("ihrie.max_iters must be >= 1");
  if (!(cfg.N_trunc >= 0.0)) v.push_back("ihrie.N_trunc must be >= 0");
  if (cfg.anderson && cfg.anderson_depth < 1) v.push_back("ihrie.anderson_depth must be >= 1");
  if (mu > 0.0 && cfg.fp_tol > 0.0 && !(window_tail(cfg, mu) < cfg.fp_tol / 10.0))
    v.push_back("ihrie.T_win: window tail e^{-mu T_win/2} = " + std::to_string(window_tail(cfg, mu)) +
                " is not below fp_tol/10");
  return v;
}

const double* PeriodicField::at(std::size_t sample, std::int64_t j) const {
  if (j < layout.lo || j > layout.hi) return nullptr;
  return traj[sample].data() + static_cast<std::size_t>((j - layout.lo) * K);
}

Field PeriodicField::value(std::size_t sample, int t_index) const {
  return shifted_value(sample, 0, t_index);
}

Field PeriodicField::shifted_value(std::size_t sample, int n_periods, int t_index) const {
  if (t_index < 0 || t_index >= layout.n_t) fail(Errc::out_of_extent, "t index outside [0, n_t)");
  const std::int64_t j = t_index + static_cast<std::int64_t>(n_periods) * layout.n_t;
  const double* y = at(sample, j);
  if (!y) fail(Errc::out_of_extent, "shift by " + std::to_string(n_periods) + " periods leaves the stored range");
  return Field(std::vector<double>(y, y + K));
}

double weighted_norm_curve(std::span<const double> mean_sq, double Lambda, double dt) {
  double sup = 0.0;
  for (std::size_t i = 0; i < mean_sq.size(); ++i)
    sup = std::max(sup, std::exp(-2.0 * Lambda * static_cast<double>(i) * dt) * mean_sq[i]);
  return sup;
}

namespace {

// Ensemble mean per t of per-sample curves, fixed reduction order.
std::vector<double> ensemble_mean(const std::vector<std::vector<double>>& per_sample, int n_t) {
  std::vector<double> mean(static_cast<std::size_t>(n_t), 0.0);
  if (per_sample.empty()) return mean;
  std::vector<double> col(per_sample.size());
  for (int t = 0; t < n_t; ++t) {
    for (std::size_t s = 0; s < per_sample.size(); ++s) col[s] = per_sample[s][t];
    mean[t] = pairwise_sum(col.data(), col.size()) / static_cast<double>(col.size());
  }
  return mean;
}

double sq_dist(const double* a, const double* b, int K) {
  double s = 0.0;
  for (int q = 0; q < K; ++q) s += (a[q] - b[q]) * (a[q] - b[q]);
  return s;
}

Frame sample_frame(const IhrieLayout& L, const WienerGrid& g, std::int64_t shift = 0) {
  Frame fr;
  fr.path = PathView(g, shift);
  fr.lo = L.lo;
  fr.n = L.n_nodes() - shift;
  fr.n_w = L.n_w;
  return fr;
}

void check_ensemble(const IhrieLayout& L, std::span<const WienerGrid> ens, int K) {
  for (const auto& g : ens) {
    if (g.K != K) fail(Errc::dimension_mismatch, "path mode count differs from basis");
    if (std::abs(g.dt - L.dt) > 1e-15 * L.dt) fail(Errc::grid_misaligned, "path dt differs from tau/n_t");
    if (g.j_min > L.lo || g.j_max < L.hi)
      fail(Errc::window_exceeds_extent, "path extent [" + std::to_string(g.t_min()) + ", " +
                                            std::to_string(g.t_max()) + "] does not cover [" +
                                            std::to_string(L.t_min()) + ", " + std::to_string(L.t_max()) + "]");
  }
}

// M(Y) on the whole frame.
void map_frame(const CocycleParams& prm, const Frame& fr, const Drift& F, const double* Y, double* out,
               std::int64_t* capped = nullptr) {
  const int K = prm.basis.K;
  const detail::KernelPlan plan = detail::build_plan(prm, fr);
  std::vector<double> fv(static_cast<std::size_t>(fr.n * K)), G;
  detail::DriftScratch ds;
  detail::drift_values(prm.basis, F, fr, Y, fv.data(), ds);
  detail::kernel_apply(prm, fr, plan, fv.data(), out, G);
  if (capped) *capped = plan.capped_total;
}

class Anderson {
 public:
  explicit Anderson(int depth) : depth_(depth) {}
  // g = M(x), r = g - x; returns the next iterate in x
  void step(std::vector<double>& x, const std::vector<double>& g) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = g[i] - x[i];
    G_.push_back(g);
    R_.push_back(r);
    if (static_cast<int>(G_.size()) > depth_ + 1) {
      G_.erase(G_.begin());
      R_.erase(R_.begin());
    }
    const int mcols = static_cast<int>(G_.size()) - 1;
    if (mcols == 0) {
      x = g;
      return;
    }
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd dR(n, mcols);
    for (int c = 0; c < mcols; ++c)
      for (Eigen::Index i = 0; i < n; ++i) dR(i, c) = R_[c + 1][i] - R_[c][i];
    Eigen::Map<const Eigen::VectorXd> rk(R_.back().data(), n);
    const Eigen::VectorXd gamma = dR.colPivHouseholderQr().solve(rk);
    x = g;
    for (int c = 0; c < mcols; ++c)
      for (Eigen::Index i = 0; i < n; ++i) x[i] -= gamma(c) * (G_[c + 1][i] - G_[c][i]);
  }

 private:
  int depth_;
  std::vector<std::vector<double>> G_, R_;
};

}  // namespace

double weighted_norm(const PeriodicField& f, double Lambda) {
  std::vector<std::vector<double>> sq(f.n_samples(), std::vector<double>(f.layout.n_t));
  for (std::size_t s = 0; s < f.n_samples(); ++s)
    for (int t = 0; t < f.layout.n_t; ++t) {
      const double* y = f.at(s, t);
      double a = 0.0;
      for (int q = 0; q < f.K; ++q) a += y[q] * y[q];
      sq[s][t] = a;
    }
  const auto mean = ensemble_mean(sq, f.layout.n_t);
  return weighted_norm_curve(mean, Lambda, f.layout.dt);
}

Field apply_M(const PeriodicField& Y, std::size_t sample, const IhrieConfig& cfg,
              const CocycleParams& params, const WienerGrid& path, const Drift& F, double t) {
  const IhrieLayout L = make_layout(cfg);
  const std::int64_t j = grid_index(t, L.dt, "t");
  if (j < 0 || j >= L.n_t) fail(Errc::invalid_argument, "apply_M needs t in [0, tau)");
  const WienerGrid* g = &path;
  check_ensemble(L, std::span<const WienerGrid>(g, 1), params.basis.K);
  const Frame fr = sample_frame(L, path);
  const int K = params.basis.K;
  const std::int64_t p = j - L.lo;
  if (p - L.n_w < 0 || p + L.n_w >= fr.n) fail(Errc::window_exceeds_extent, "window leaves the stored range");
  std::vector<double> fv(static_cast<std::size_t>(fr.n * K), 0.0);
  std::vector<double> gu(params.basis.n_x()), gf(params.basis.n_x());
  const double* y0 = Y.traj.at(sample).data();
  for (std::int64_t i = p - L.n_w; i <= p + L.n_w; ++i)
    nemytskii_into(F, static_cast<double>(fr.lo + i) * L.dt, y0 + i * K, params.basis, gu.data(), gf.data(),
                   fv.data() + i * K);
  Field out(K);
  for (int q = 0; q < K; ++q) out[q] = detail::kernel_direct(params, fr, fv.data(), q, p);
  return out;
}

SolveResult solve_fixed_point(const IhrieConfig& cfg, const CocycleParams& params,
                              std::span<const WienerGrid> ensemble, const Drift& F) {
  const IhrieLayout L = make_layout(cfg);
  const int K = params.basis.K;
  check_ensemble(L, ensemble, K);
  const std::size_t S = ensemble.size();
  const std::size_t len = static_cast<std::size_t>(L.n_nodes() * K);

  SolveResult res;
  PeriodicField& Y = res.Y;
  Y.config = cfg;
  Y.layout = L;
  Y.K = K;
  Y.seed = S ? ensemble[0].seed : 0;
  Y.traj.assign(S, std::vector<double>(len, 0.0));
  for (const auto& g : ensemble) Y.sample_ids.push_back(g.sample_id);

  std::vector<Anderson> aa;
  if (cfg.anderson) aa.assign(S, Anderson(cfg.anderson_depth));
  std::vector<std::vector<double>> diff(S, std::vector<double>(L.n_t, 0.0));
  std::vector<std::int64_t> capped(S, 0);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    parallel_for(S, [&](std::size_t s) {
      const Frame fr = sample_frame(L, ensemble[s]);
      std::vector<double> out(len);
      map_frame(params, fr, F, Y.traj[s].data(), out.data(), &capped[s]);
      for (int t = 0; t < L.n_t; ++t) {
        const std::size_t o = static_cast<std::size_t>((t - L.lo) * K);
        diff[s][t] = sq_dist(out.data() + o, Y.traj[s].data() + o, K);
      }
      if (cfg.anderson)
        aa[s].step(Y.traj[s], out);
      else
        Y.traj[s].swap(out);
    });
    const double d = weighted_norm_curve(ensemble_mean(diff, L.n_t), params.Lambda, L.dt);
    res.history.push_back(d);
    res.iterations = it;
    if (d < cfg.fp_tol) {
      res.converged = true;
      break;
    }
  }
  for (auto c : capped) res.capped_nodes += c;

  // observed bounds of F and dF/du over the stored range
  std::vector<double> supF(S, 0.0), supG(S, 0.0);
  parallel_for(S, [&](std::size_t s) {
    std::vector<double> u(params.basis.n_x()), f(params.basis.n_x()), df(params.basis.n_x());
    for (std::int64_t p = 0; p < L.n_nodes(); ++p) {
      const double t = static_cast<double>(L.lo + p) * L.dt;
      reconstruct_into(Y.traj[s].data() + p * K, params.basis, u.data());
      F.eval(t, u.data(), f.data(), u.size());
      F.grad(t, u.data(), df.data(), u.size());
      for (std::size_t i = 0; i < u.size(); ++i) {
        supF[s] = std::max(supF[s], std::abs(f[i]));
        supG[s] = std::max(supG[s], std::abs(df[i]));
      }
    }
  });
  for (std::size_t s = 0; s < S; ++s) {
    res.sup_F = std::max(res.sup_F, supF[s]);
    res.sup_gradF = std::max(res.sup_gradF, supG[s]);
  }
  return res;
}

double residual(const PeriodicField& Y, const IhrieConfig& cfg, const CocycleParams& params,
                std::span<const WienerGrid> ensemble, const Drift& F) {
  const IhrieLayout L = make_layout(cfg);
  const int K = params.basis.K;
  check_ensemble(L, ensemble, K);
  if (ensemble.size() != Y.n_samples()) fail(Errc::dimension_mismatch, "ensemble/solution size");
  std::vector<std::vector<double>> r(Y.n_samples(), std::vector<double>(L.n_t));
  parallel_for(Y.n_samples(), [&](std::size_t s) {
    const Frame fr = sample_frame(L, ensemble[s]);
    std::vector<double> out(static_cast<std::size_t>(fr.n * K));
    map_frame(params, fr, F, Y.traj[s].data(), out.data());
    for (int t = 0; t < L.n_t; ++t) {
      const std::size_t o = static_cast<std::size_t>((t - L.lo) * K);
      r[s][t] = sq_dist(out.data() + o, Y.traj[s].data() + o, K);
    }
  });
  const auto mean = ensemble_mean(r, L.n_t);
  return *std::max_element(mean.begin(), mean.end());
}

double check_periodicity(const PeriodicField& Y, const IhrieConfig& cfg, const CocycleParams& params,
                         std::span<const WienerGrid> ensemble, const Drift& F) {
  const IhrieLayout L = make_layout(cfg);
  const int K = params.basis.K;
  check_ensemble(L, ensemble, K);
  if (ensemble.size() != Y.n_samples()) fail(Errc::dimension_mismatch, "ensemble/solution size");
  std::vector<std::vector<double>> gap(Y.n_samples(), std::vector<double>(L.n_t));
  parallel_for(Y.n_samples(), [&](std::size_t s) {
    const Frame fr = sample_frame(L, ensemble[s]);
    std::vector<double> out(static_cast<std::size_t>(fr.n * K));
    map_frame(params, fr, F, Y.traj[s].data(), out.data());
    // theta_tau w: same path re-windowed, Y re-indexed by one period
    const Frame sh = sample_frame(L, ensemble[s], L.n_t);
    std::vector<double> out_sh(static_cast<std::size_t>(sh.n * K));
    map_frame(params, sh, F, Y.traj[s].data() + L.n_t * K, out_sh.data());
    for (int t = 0; t < L.n_t; ++t) {
      const std::size_t a = static_cast<std::size_t>((t + L.n_t - L.lo) * K);
      const std::size_t b = static_cast<std::size_t>((t - L.lo) * K);
      gap[s][t] = sq_dist(out.data() + a, out_sh.data() + b, K);
    }
  });
  const auto mean = ensemble_mean(gap, L.n_t);
  return *std::max_element(mean.begin(), mean.end());
}

double certificate_bound(std::span<const double> h) {
  if (h.empty()) return std::numeric_limits<double>::infinity();
  if (h.size() == 1 || h.back() == 0.0) return h.back();
  const double rho = std::sqrt(h.back() / h[h.size() - 2]);
  if (!(rho < 1.0)) return std::numeric_limits<double>::infinity();
  return h.back() / ((1.0 - rho) * (1.0 - rho));
}

LocalizeResult localize(std::span<const LocalizeInput> family, std::span<const double> C_Lambda) {
  LocalizeResult out;
  if (family.empty()) return out;
  std::vector<LocalizeInput> fam(family.begin(), family.end());
  std::sort(fam.begin(), fam.end(), [](const auto& a, const auto& b) { return a.N < b.N; });
  const PeriodicField& ref = *fam.front().Y;
  for (const auto& f : fam)
    if (f.Y->n_samples() != C_Lambda.size()) fail(Errc::dimension_mismatch, "family/C_Lambda sizes");
  out.Y.config = ref.config;
  out.Y.layout = ref.layout;
  out.Y.K = ref.K;
  out.Y.seed = ref.seed;
  std::size_t covered = 0;
  for (std::size_t s = 0; s < C_Lambda.size(); ++s) {
    double chosen = std::numeric_limits<double>::quiet_NaN();
    for (const auto& f : fam) {
      if (C_Lambda[s] < f.N) {
        chosen = f.N;
        out.Y.traj.push_back(f.Y->traj[s]);
        out.Y.sample_ids.push_back(f.Y->sample_ids[s]);
        ++covered;
        break;
      }
    }
    out.chosen_N.push_back(chosen);
  }
  const double n = static_cast<double>(C_Lambda.size());
  out.coverage = n > 0 ? static_cast<double>(covered) / n : 1.0;
  out.uncovered_fraction = 1.0 - out.coverage;
  return out;
}

void write_solution_csv(const PeriodicField& Y, const std::string& file) {
  std::FILE* f = std::fopen(file.c_str(), "w");
  if (!f) fail(Errc::io_error, "cannot open " + file);
  std::fprintf(f, "sample_id,t_index,mode,coefficient\n");
  for (std::size_t s = 0; s < Y.n_samples(); ++s)
    for (int t = 0; t < Y.layout.n_t; ++t) {
      const double* y = Y.at(s, t);
      for (int q = 0; q < Y.K; ++q)
        std::fprintf(f, "%llu,%d,%d,%.17g\n", static_cast<unsigned long long>(Y.sample_ids[s]), t, q + 1, y[q]);
    }
  if (std::fclose(f) != 0) fail(Errc::io_error, "write failed for " + file);
}

}  // namespace rps
