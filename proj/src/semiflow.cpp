#include "rps_spde/semiflow.hpp"

#include <cmath>
#include <cstdio>

#include "parallel.hpp"
#include "rps_spde/error.hpp"

namespace rps {

const char* scheme_name(Scheme s) {
  return s == Scheme::exponential_euler ? "exponential-euler" : "midpoint-quadrature";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "exponential-euler") return Scheme::exponential_euler;
  if (name == "midpoint-quadrature") return Scheme::midpoint_quadrature;
  fail(Errc::invalid_argument, "unknown scheme '" + name + "'");
}

Field integrate_mild(const Field& psi, double s, double t, const PathView& path, const CocycleParams& params,
                     const Drift& F, const MildSolverConfig& cfg) {
  const int K = params.basis.K;
  if (psi.size() != static_cast<std::size_t>(K)) fail(Errc::dimension_mismatch, "field size");
  const double dt = path.dt();
  const std::int64_t js = grid_index(s, dt, "s");
  const std::int64_t jt = grid_index(t, dt, "t");
  const std::int64_t r = grid_index(cfg.dt_flow, dt, "dt_flow");
  if (r < 1) fail(Errc::invalid_argument, "dt_flow must be a positive multiple of the path dt");
  if (jt < js) fail(Errc::negative_time, "integrate_mild needs s <= t");
  if ((jt - js) % r != 0) fail(Errc::grid_misaligned, "t - s is not a multiple of dt_flow");
  path.require(js, jt, "integrate_mild");
  const double h = static_cast<double>(r) * dt;
  const std::int64_t steps = (jt - js) / r;

  std::vector<double> D(K, 0.0), u(K), fu(K), Fn(K), Dn(K), gu(params.basis.n_x()), gf(params.basis.n_x());
  auto lin = [&](std::int64_t j, int q) { return std::exp(log_phi_idx(params, q, j - js, js, path)) * psi[q]; };
  auto state = [&](std::int64_t j, const std::vector<double>& d, std::vector<double>& out) {
    for (int q = 0; q < K; ++q) out[q] = lin(j, q) + d[q];
  };
  auto guard = [&](const std::vector<double>& v, std::int64_t j) {
    double n2 = 0.0;
    for (double c : v) n2 += c * c;
    if (!std::isfinite(n2) || std::sqrt(n2) > cfg.blowup)
      fail(Errc::non_finite_drift, "mild solution exceeded the blow-up ceiling at t = " +
                                       std::to_string(static_cast<double>(j) * dt));
  };

  for (std::int64_t n = 0; n < steps; ++n) {
    const std::int64_t j0 = js + n * r, j1 = j0 + r;
    state(j0, D, u);
    nemytskii_into(F, static_cast<double>(j0) * dt, u.data(), params.basis, gu.data(), gf.data(), Fn.data());
    std::vector<double> step(K);
    for (int q = 0; q < K; ++q) step[q] = std::exp(log_phi_idx(params, q, r, j0, path));
    if (cfg.scheme == Scheme::exponential_euler) {
      for (int q = 0; q < K; ++q) D[q] = step[q] * (D[q] + h * Fn[q]);
    } else {
      std::vector<double> base(K);
      for (int q = 0; q < K; ++q) {
        base[q] = step[q] * (D[q] + 0.5 * h * Fn[q]);
        Dn[q] = step[q] * (D[q] + h * Fn[q]);
      }
      const double t1 = static_cast<double>(j1) * dt;
      for (int it = 0; it < cfg.implicit_max_iters; ++it) {
        state(j1, Dn, u);
        nemytskii_into(F, t1, u.data(), params.basis, gu.data(), gf.data(), fu.data());
        double change = 0.0, scale = 0.0;
        for (int q = 0; q < K; ++q) {
          const double v = base[q] + 0.5 * h * fu[q];
          change = std::max(change, std::abs(v - Dn[q]));
          scale = std::max(scale, std::abs(v));
          Dn[q] = v;
        }
        if (change <= cfg.implicit_tol * (1.0 + scale)) break;
      }
      D = Dn;
    }
    guard(D, j1);
  }
  Field out(K);
  state(jt, D, out.coeffs);
  return out;
}

VerifyResult verify_rps(const PeriodicField& Y, const CocycleParams& params, std::span<const WienerGrid> ensemble,
                        const Drift& F, const MildSolverConfig& flow, int t_stride, std::size_t max_samples) {
  if (t_stride < 1) fail(Errc::invalid_argument, "t_stride must be >= 1");
  if (ensemble.size() != Y.n_samples()) fail(Errc::dimension_mismatch, "ensemble/solution size");
  const std::size_t S = max_samples == 0 ? Y.n_samples() : std::min(max_samples, Y.n_samples());
  const IhrieLayout& L = Y.layout;
  const int K = Y.K;
  std::vector<int> ts;
  for (int t = 0; t < L.n_t; t += t_stride) ts.push_back(t);
  std::vector<std::vector<double>> err(S, std::vector<double>(ts.size())), ysq(S, std::vector<double>(L.n_t));
  parallel_for(S, [&](std::size_t s) {
    const PathView path(ensemble[s]);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const int t = ts[i];
      const Field psi = Y.value(s, t);
      const Field u = integrate_mild(psi, t * L.dt, (t + L.n_t) * L.dt, path, params, F, flow);
      const double* target = Y.at(s, t + L.n_t);
      double e = 0.0;
      for (int q = 0; q < K; ++q) e += (u[q] - target[q]) * (u[q] - target[q]);
      err[s][i] = e;
    }
    for (int t = 0; t < L.n_t; ++t) ysq[s][t] = Y.value(s, t).norm_sq();
  });
  VerifyResult r;
  std::vector<double> col(S), dev(S);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t s = 0; s < S; ++s) col[s] = err[s][i];
    const double mean = S ? pairwise_sum(col.data(), S) / static_cast<double>(S) : 0.0;
    for (std::size_t s = 0; s < S; ++s) dev[s] = (col[s] - mean) * (col[s] - mean);
    const double se = S > 1 ? std::sqrt(pairwise_sum(dev.data(), S) / (S - 1.0) / S) : 0.0;
    r.per_t.push_back({ts[i], mean, se});
    r.err_L2 = std::max(r.err_L2, mean);
  }
  for (int t = 0; t < L.n_t; ++t) {
    for (std::size_t s = 0; s < S; ++s) col[s] = ysq[s][t];
    if (S) r.sup_mean_sq_Y = std::max(r.sup_mean_sq_Y, pairwise_sum(col.data(), S) / static_cast<double>(S));
  }
  return r;
}

void write_verification_csv(const VerifyResult& r, const std::string& file) {
  std::FILE* f = std::fopen(file.c_str(), "w");
  if (!f) fail(Errc::io_error, "cannot open " + file);
  std::fprintf(f, "t_index,mean_sq_error,stderr\n");
  for (const auto& row : r.per_t) std::fprintf(f, "%d,%.17g,%.17g\n", row.t_index, row.mean_sq_error, row.stderr_);
  if (std::fclose(f) != 0) fail(Errc::io_error, "write failed for " + file);
}

}  // namespace rps
