#include "rps_spde/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "parallel.hpp"
#include "rps_spde/error.hpp"

namespace rps {

CocycleParams make_params(SpectralBasis basis, NoiseSpec noise, double Lambda, double N_trunc) {
  if (noise.K() != basis.K)
    fail(Errc::dimension_mismatch, "noise has " + std::to_string(noise.K()) +
                                       " intensities, basis has " + std::to_string(basis.K) + " modes");
  if (!(N_trunc >= 0.0)) fail(Errc::invalid_argument, "N_trunc must be >= 0");
  CocycleParams p;
  p.mu_gap = spectral_gap(basis);
  p.Lambda = Lambda > 0.0 ? Lambda : p.mu_gap / 8.0;
  if (!(p.Lambda < p.mu_gap / 4.0))
    fail(Errc::invalid_argument, "Lambda = " + std::to_string(p.Lambda) + " not in (0, mu/4) with mu = " +
                                     std::to_string(p.mu_gap));
  p.N_trunc = N_trunc;
  p.basis = std::move(basis);
  p.noise = std::move(noise);
  return p;
}

double log_phi_idx(const CocycleParams& p, int q, std::int64_t jt, std::int64_t js,
                   const PathView& path) {
  const double t = static_cast<double>(jt) * path.dt();
  return p.basis.mu[q] * t + p.noise.sigma[q] * path.incr(q, js, js + jt);
}

double cap_idx(const CocycleParams& p, int q, std::int64_t jt, std::int64_t js, double dt) {
  if (std::isinf(p.N_trunc)) return p.N_trunc;
  const double t = static_cast<double>(jt) * dt;
  const double s = static_cast<double>(js) * dt;
  return p.N_trunc * std::exp(0.5 * p.basis.mu[q] * t + p.Lambda * std::abs(s));
}

double phi_truncated_idx(const CocycleParams& p, int q, std::int64_t jt, std::int64_t js,
                         const PathView& path) {
  const double phi = std::exp(log_phi_idx(p, q, jt, js, path));
  const double cap = cap_idx(p, q, jt, js, path.dt());
  // phi * min{1, cap / phi}
  return phi <= cap ? phi : cap;
}

namespace {

int mode_index(const CocycleParams& p, int k) {
  if (k < 1 || k > p.basis.K)
    fail(Errc::dimension_mismatch, "mode " + std::to_string(k) + " outside 1.." + std::to_string(p.basis.K));
  return k - 1;
}

void check_side(const CocycleParams& p, int q, double t) {
  if (p.basis.stable(q) && t < 0.0)
    fail(Errc::wrong_time_sign, "mode " + std::to_string(q + 1) + " is stable, needs t >= 0");
  if (!p.basis.stable(q) && t > 0.0)
    fail(Errc::wrong_time_sign, "mode " + std::to_string(q + 1) + " is unstable, needs t <= 0");
}

}  // namespace

double phi_mode(const CocycleParams& p, int k, double t, double s, const PathView& path) {
  const int q = mode_index(p, k);
  const std::int64_t jt = grid_index(t, path.dt(), "t");
  const std::int64_t js = grid_index(s, path.dt(), "s");
  path.require(std::min(js, js + jt), std::max(js, js + jt), "phi_mode");
  return std::exp(log_phi_idx(p, q, jt, js, path));
}

Field phi_apply(const CocycleParams& p, double t, double s, const PathView& path, const Field& u) {
  if (u.size() != static_cast<std::size_t>(p.basis.K)) fail(Errc::dimension_mismatch, "field size");
  const std::int64_t jt = grid_index(t, path.dt(), "t");
  const std::int64_t js = grid_index(s, path.dt(), "s");
  path.require(std::min(js, js + jt), std::max(js, js + jt), "phi_apply");
  Field out(p.basis.K);
  for (int q = 0; q < p.basis.K; ++q) out[q] = std::exp(log_phi_idx(p, q, jt, js, path)) * u[q];
  return out;
}

double phi_truncated(const CocycleParams& p, int k, double t, double s, const PathView& path) {
  const int q = mode_index(p, k);
  check_side(p, q, t);
  const std::int64_t jt = grid_index(t, path.dt(), "t");
  const std::int64_t js = grid_index(s, path.dt(), "s");
  path.require(std::min(js, js + jt), std::max(js, js + jt), "phi_truncated");
  return phi_truncated_idx(p, q, jt, js, path);
}

Field project_pm(const Field& u, const SpectralBasis& basis, int sign) {
  if (u.size() != static_cast<std::size_t>(basis.K)) fail(Errc::dimension_mismatch, "field size");
  Field out(basis.K);
  for (int q = 0; q < basis.K; ++q) {
    const bool unstable = q < basis.m;
    if ((sign > 0) == unstable) out[q] = u[q];
  }
  return out;
}

double check_cocycle(const CocycleParams& p, double t1, double t2, double s, const PathView& path) {
  const double dt = path.dt();
  const std::int64_t j1 = grid_index(t1, dt, "t1");
  const std::int64_t j2 = grid_index(t2, dt, "t2");
  const std::int64_t js = grid_index(s, dt, "s");
  const std::int64_t lo = std::min({js, js + j2, js + j1 + j2});
  const std::int64_t hi = std::max({js, js + j2, js + j1 + j2});
  path.require(lo, hi, "check_cocycle");
  double dev = 0.0;
  for (int q = 0; q < p.basis.K; ++q) {
    // relative gap in log form, so deep stable modes do not underflow
    const double whole = log_phi_idx(p, q, j1 + j2, js, path);
    const double comp = log_phi_idx(p, q, j1, js + j2, path) + log_phi_idx(p, q, j2, js, path);
    dev = std::max(dev, std::abs(std::expm1(comp - whole)));
  }
  return dev;
}

double check_commutation(const SpectralBasis& basis, const NoiseSpec& noise, double t, const Field& u) {
  if (t < 0.0) fail(Errc::negative_time, "commutation check needs t >= 0");
  if (u.size() != static_cast<std::size_t>(basis.K) || noise.K() != basis.K)
    fail(Errc::dimension_mismatch, "field/noise size");
  Field Bu(basis.K);
  for (int q = 0; q < basis.K; ++q) Bu[q] = noise.sigma[q] * u[q];
  const Field TBu = heat_semigroup(basis, t, Bu);
  const Field Tu = heat_semigroup(basis, t, u);
  double dev = 0.0;
  for (int q = 0; q < basis.K; ++q) {
    const double d = TBu[q] - noise.sigma[q] * Tu[q];
    dev += d * d;
  }
  return std::sqrt(dev);
}

LyapunovEstimate estimate_lyapunov(const CocycleParams& p, int k, double T,
                                   std::span<const WienerGrid> ensemble) {
  const int q = mode_index(p, k);
  if (!(T > 0.0)) fail(Errc::invalid_argument, "T must be > 0");
  LyapunovEstimate est;
  est.n_samples = static_cast<int>(ensemble.size());
  if (ensemble.empty()) return est;
  const double Ts = p.basis.stable(q) ? T : -T;
  std::vector<double> v(ensemble.size());
  parallel_for(ensemble.size(), [&](std::size_t i) {
    const PathView path(ensemble[i]);
    const std::int64_t jT = grid_index(Ts, path.dt(), "T");
    path.require(std::min<std::int64_t>(0, jT), std::max<std::int64_t>(0, jT), "estimate_lyapunov");
    v[i] = log_phi_idx(p, q, jT, 0, path) / Ts;
  });
  const double n = static_cast<double>(v.size());
  const double mean = pairwise_sum(v.data(), v.size()) / n;
  std::vector<double> d2(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d2[i] = (v[i] - mean) * (v[i] - mean);
  const double var = v.size() > 1 ? pairwise_sum(d2.data(), d2.size()) / (n - 1.0) : 0.0;
  est.estimate = mean;
  est.stderr_analytic = p.noise.sigma[q] / std::sqrt(T * n);
  est.stderr_sample = std::sqrt(var / n);
  return est;
}

DichotomyReport estimate_C_lambda(const CocycleParams& p, const PathView& path,
                                  std::span<const double> t_grid, std::span<const double> s_grid) {
  DichotomyReport r;
  r.t_grid.assign(t_grid.begin(), t_grid.end());
  r.s_grid.assign(s_grid.begin(), s_grid.end());
  r.per_mode_sup.assign(p.basis.K, 0.0);
  const double dt = path.dt();
  for (int q = 0; q < p.basis.K; ++q) {
    const double sgn = p.basis.stable(q) ? 1.0 : -1.0;
    for (double tm : t_grid) {
      if (tm < 0.0) fail(Errc::invalid_argument, "t grid holds magnitudes, got negative value");
      const std::int64_t jt = grid_index(sgn * tm, dt, "t");
      for (double s : s_grid) {
        const std::int64_t js = grid_index(s, dt, "s");
        path.require(std::min(js, js + jt), std::max(js, js + jt), "estimate_C_lambda");
        const double t = static_cast<double>(jt) * dt;
        const double lv = log_phi_idx(p, q, jt, js, path) - 0.5 * p.basis.mu[q] * t -
                          p.Lambda * std::abs(static_cast<double>(js) * dt);
        const double v = std::exp(lv);
        r.entries.push_back({q + 1, t, static_cast<double>(js) * dt, v});
        r.per_mode_sup[q] = std::max(r.per_mode_sup[q], v);
      }
    }
  }
  for (double v : r.per_mode_sup) r.C_Lambda = std::max(r.C_Lambda, v);

  // C1^2 = sup_{t>=0} max_{k>m} e^{(2mu_k - mu_{m+1})t + 2 sigma_k W_t}, C2 analogously backward.
  double c1 = 0.0, c2 = 0.0;
  const int m = p.basis.m;
  for (double tm : t_grid) {
    for (int q = 0; q < p.basis.K; ++q) {
      const bool st = p.basis.stable(q);
      const double ref = st ? p.basis.mu[m] : p.basis.mu[m - 1];
      const std::int64_t jt = grid_index(st ? tm : -tm, dt, "t");
      path.require(std::min<std::int64_t>(0, jt), std::max<std::int64_t>(0, jt), "estimate_C_lambda");
      const double t = static_cast<double>(jt) * dt;
      const double e = (2.0 * p.basis.mu[q] - ref) * t + 2.0 * p.noise.sigma[q] * path.value(q, jt);
      if (st)
        c1 = std::max(c1, e);
      else
        c2 = std::max(c2, e);
    }
  }
  r.C1 = m < p.basis.K ? std::exp(0.5 * c1) : 1.0;
  r.C2 = m > 0 ? std::exp(0.5 * c2) : 1.0;
  return r;
}

double dichotomy_constant(const CocycleParams& p, const PathView& path, std::span<const double> t_grid) {
  const double zero = 0.0;
  const DichotomyReport r = estimate_C_lambda(p, path, t_grid, std::span<const double>(&zero, 1));
  return std::max(r.C1, r.C2);
}

std::vector<TemperednessRow> temperedness_diagnostic(const CocycleParams& p,
                                                     std::span<const WienerGrid> ensemble,
                                                     std::span<const double> shifts,
                                                     std::span<const double> t_grid) {
  std::vector<TemperednessRow> rows;
  for (double s : shifts) {
    if (s == 0.0) fail(Errc::invalid_argument, "shift s = 0 is excluded");
    std::vector<double> v(ensemble.size());
    parallel_for(ensemble.size(), [&](std::size_t i) {
      const PathView view = shift(ensemble[i], s);
      const double C = dichotomy_constant(p, view, t_grid);
      v[i] = std::max(0.0, std::log(C)) / std::abs(s);
    });
    const double mean = ensemble.empty() ? 0.0 : pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
    rows.push_back({s, mean});
  }
  return rows;
}

SemigroupDeviation semigroup_deviation(const CocycleParams& p, int k, double t,
                                       std::span<const WienerGrid> ensemble) {
  const int q = mode_index(p, k);
  check_side(p, q, t);
  const double mu = p.basis.mu[q];
  const double sg = p.noise.sigma[q];
  SemigroupDeviation d;
  const double eT = std::exp(mu * t);
  d.lhs_T = (1.0 - eT) * (1.0 - eT);
  d.rhs_T = std::abs(mu) * std::abs(t);
  d.rhs_Phi_shape = sg * sg * (std::abs(t) + t * t) * std::max(1.0, std::exp(2.0 * mu * t + 2.0 * sg * sg * std::abs(t)));
  if (ensemble.empty()) return d;
  std::vector<double> v(ensemble.size());
  parallel_for(ensemble.size(), [&](std::size_t i) {
    const PathView path(ensemble[i]);
    const std::int64_t jt = grid_index(t, path.dt(), "t");
    path.require(std::min<std::int64_t>(0, jt), std::max<std::int64_t>(0, jt), "semigroup_deviation");
    const double diff = std::exp(log_phi_idx(p, q, jt, 0, path)) - eT;
    v[i] = diff * diff;
  });
  const double n = static_cast<double>(v.size());
  d.lhs_Phi = pairwise_sum(v.data(), v.size()) / n;
  std::vector<double> d2(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d2[i] = (v[i] - d.lhs_Phi) * (v[i] - d.lhs_Phi);
  d.lhs_Phi_stderr = v.size() > 1 ? std::sqrt(pairwise_sum(d2.data(), d2.size()) / (n - 1.0) / n) : 0.0;
  return d;
}

void write_dichotomy_csv(const DichotomyReport& r, const std::string& file) {
  std::FILE* f = std::fopen(file.c_str(), "w");
  if (!f) fail(Errc::io_error, "cannot open " + file);
  std::fprintf(f, "mode,t,s,normalized_norm\n");
  for (const auto& e : r.entries) std::fprintf(f, "%d,%.17g,%.17g,%.17g\n", e.mode, e.t, e.s, e.normalized_norm);
  if (std::fclose(f) != 0) fail(Errc::io_error, "write failed for " + file);
}

void write_dichotomy_json(const DichotomyReport& r, const CocycleParams& p, std::uint64_t seed,
                          const std::string& file) {
  nlohmann::ordered_json j;
  j["C_Lambda"] = r.C_Lambda;
  j["C1"] = r.C1;
  j["C2"] = r.C2;
  j["Lambda"] = p.Lambda;
  j["N"] = p.N_trunc;
  j["seed"] = seed;
  j["t_grid"] = r.t_grid;
  j["s_grid"] = r.s_grid;
  j["verified_on"] = "sampled grid only";
  std::ofstream os(file);
  if (!os) fail(Errc::io_error, "cannot open " + file);
  os << j.dump(2) << "\n";
}

}  // namespace rps
