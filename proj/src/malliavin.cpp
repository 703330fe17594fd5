#include "rps_spde/malliavin.hpp"

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

namespace {

int mode_q(const CocycleParams& p, int j) {
  if (j < 1 || j > p.basis.K)
    fail(Errc::dimension_mismatch, "mode " + std::to_string(j) + " outside 1.." + std::to_string(p.basis.K));
  return j - 1;
}

void side_check(const CocycleParams& p, int q, double t) {
  if (p.basis.stable(q) && t < 0.0)
    fail(Errc::wrong_time_sign, "mode " + std::to_string(q + 1) + " is stable, needs t >= 0");
  if (!p.basis.stable(q) && t > 0.0)
    fail(Errc::wrong_time_sign, "mode " + std::to_string(q + 1) + " is unstable, needs t <= 0");
}

Frame full_frame(const IhrieLayout& L, const WienerGrid& g) {
  Frame fr;
  fr.path = PathView(g);
  fr.lo = L.lo;
  fr.n = L.n_nodes();
  fr.n_w = L.n_w;
  return fr;
}

void check_path(const IhrieLayout& L, const WienerGrid& g, int K) {
  if (g.K != K) fail(Errc::dimension_mismatch, "path mode count differs from basis");
  if (std::abs(g.dt - L.dt) > 1e-15 * L.dt) fail(Errc::grid_misaligned, "path dt differs from tau/n_t");
  if (g.j_min > L.lo || g.j_max < L.hi) fail(Errc::window_exceeds_extent, "path does not cover the frame");
}

// Galerkin matrix of u -> P[dF(t, Y) u] at one node, K x K row-major
void grad_matrix(const SpectralBasis& b, const Drift& F, double t, const double* y, double* A,
                 std::vector<double>& u, std::vector<double>& d) {
  const int K = b.K, n = b.n_x();
  u.resize(n);
  d.resize(n);
  reconstruct_into(y, b, u.data());
  F.grad(t, u.data(), d.data(), u.size());
  for (int i = 1; i < n - 1; ++i) d[i] *= b.w[i];
  for (int q = 0; q < K; ++q) {
    const double* pq = b.mode(q);
    for (int r = q; r < K; ++r) {
      const double* pr = b.mode(r);
      double s = 0.0;
      for (int i = 1; i < n - 1; ++i) s += d[i] * pq[i] * pr[i];
      A[q * K + r] = s;
      A[r * K + q] = s;
    }
  }
}

}  // namespace

double dphiN_idx(const CocycleParams& p, int q, std::int64_t jr, std::int64_t jt, std::int64_t js,
                 const PathView& path, bool* boundary) {
  if (boundary) *boundary = false;
  const bool st = p.basis.stable(q);
  const bool in = st ? (js <= jr && jr < js + jt) : (js + jt <= jr && jr < js);
  if (!in) return 0.0;
  const double phi = std::exp(log_phi_idx(p, q, jt, js, path));
  const double cap = cap_idx(p, q, jt, js, path.dt());
  const double ratio = cap / phi;
  if (boundary && std::abs(ratio - 1.0) < 1e-9) *boundary = true;
  // min{1, cap/phi} phi - 1{cap/phi < 1} (cap/phi) phi
  const double val = std::min(1.0, ratio) * phi - (ratio < 1.0 ? ratio * phi : 0.0);
  return (st ? 1.0 : -1.0) * p.noise.sigma[q] * val;
}

double dphiN(const CocycleParams& p, int j, double r, double t, double s, const PathView& path) {
  const int q = mode_q(p, j);
  side_check(p, q, t);
  const double dt = path.dt();
  const std::int64_t jr = grid_index(r, dt, "r");
  const std::int64_t jt = grid_index(t, dt, "t");
  const std::int64_t js = grid_index(s, dt, "s");
  path.require(std::min(js, js + jt), std::max(js, js + jt), "dphiN");
  return dphiN_idx(p, q, jr, jt, js, path);
}

BoundCheck check_dphi_bound(const CocycleParams& p, int j, double t, double s, const PathView& path) {
  const int q = mode_q(p, j);
  side_check(p, q, t);
  const double dt = path.dt();
  const std::int64_t jt = grid_index(t, dt, "t");
  const std::int64_t js = grid_index(s, dt, "s");
  path.require(std::min(js, js + jt), std::max(js, js + jt), "check_dphi_bound");
  BoundCheck bc;
  if (jt != 0) {
    const std::int64_t jr = jt > 0 ? js : js - 1;
    bc.lhs = std::abs(dphiN_idx(p, q, jr, jt, js, path));
  }
  const double sg = p.noise.sigma[q];
  const double tt = static_cast<double>(jt) * dt, ss = static_cast<double>(js) * dt;
  bc.rhs = sg == 0.0 ? 0.0 : 2.0 * sg * p.N_trunc * std::exp(0.5 * p.basis.mu[q] * tt + p.Lambda * std::abs(ss));
  bc.ok = bc.lhs <= bc.rhs * (1.0 + 1e-12);
  return bc;
}

Field dM(const PeriodicField& Y, std::size_t sample, std::span<const double> DY, const IhrieConfig& cfg,
         const CocycleParams& params, const WienerGrid& path, const Drift& F, int j, double r, double t) {
  const IhrieLayout L = make_layout(cfg);
  const int K = params.basis.K;
  const int qj = mode_q(params, j);
  check_path(L, path, K);
  if (sample >= Y.n_samples()) fail(Errc::out_of_extent, "sample index");
  if (!DY.empty() && DY.size() != static_cast<std::size_t>(L.n_nodes() * K))
    fail(Errc::dimension_mismatch, "DY must hold n_nodes x K values");
  const std::int64_t jt = grid_index(t, L.dt, "t");
  const std::int64_t jr = grid_index(r, L.dt, "r");
  const Frame fr = full_frame(L, path);
  const std::int64_t p = jt - L.lo;
  if (p - L.n_w < 0 || p + L.n_w >= fr.n) fail(Errc::window_exceeds_extent, "window leaves the stored range");

  const double* y0 = Y.traj[sample].data();
  std::vector<double> fv(static_cast<std::size_t>(fr.n * K), 0.0), gv(static_cast<std::size_t>(fr.n * K), 0.0);
  std::vector<double> gu(params.basis.n_x()), gf(params.basis.n_x()), A(static_cast<std::size_t>(K * K));
  for (std::int64_t i = p - L.n_w; i <= p + L.n_w; ++i) {
    const double ti = static_cast<double>(fr.lo + i) * L.dt;
    nemytskii_into(F, ti, y0 + i * K, params.basis, gu.data(), gf.data(), fv.data() + i * K);
    if (!DY.empty()) {
      grad_matrix(params.basis, F, ti, y0 + i * K, A.data(), gu, gf);
      for (int q = 0; q < K; ++q) {
        double s = 0.0;
        for (int k = 0; k < K; ++k) s += A[q * K + k] * DY[i * K + k];
        gv[i * K + q] = s;
      }
    }
  }
  Field out(K);
  if (!DY.empty())
    for (int q = 0; q < K; ++q) out[q] = detail::kernel_direct(params, fr, gv.data(), q, p);

  double s = 0.0;
  if (params.basis.stable(qj)) {
    for (std::int64_t i = p - L.n_w; i <= p; ++i) {
      const double w = (i == p || i == p - L.n_w) ? 0.5 : 1.0;
      s += w * dphiN_idx(params, qj, jr, p - i, fr.lo + i, fr.path) * fv[i * K + qj];
    }
    out[qj] += s * L.dt;
  } else {
    for (std::int64_t i = p; i <= p + L.n_w; ++i) {
      const double w = (i == p || i == p + L.n_w) ? 0.5 : 1.0;
      s += w * dphiN_idx(params, qj, jr, p - i, fr.lo + i, fr.path) * fv[i * K + qj];
    }
    out[qj] -= s * L.dt;
  }
  return out;
}

KConstants compute_K1_K2(const CocycleParams& params, double tau, const FBounds& bounds) {
  if (!(bounds.sup_F >= 0.0) || !(bounds.sup_gradF >= 0.0)) fail(Errc::invalid_argument, "F bounds must be >= 0");
  if (!(tau > 0.0)) fail(Errc::invalid_argument, "tau must be > 0");
  const SpectralBasis& b = params.basis;
  const double Lam = params.Lambda, N = params.N_trunc;
  const bool has_m = b.m >= 1, has_s = b.m < b.K;
  double k1 = 0.0, k2 = 0.0;
  // sum_{i >= -1} x^i = 1/x + 1/(1 - x)
  auto geo = [](double x) {
    if (!(x < 1.0)) fail(Errc::divergent_series, "geometric ratio " + std::to_string(x) + " >= 1");
    return 1.0 / x + 1.0 / (1.0 - x);
  };
  if (has_m) {
    const double mu = b.mu[b.m - 1];
    const double g = geo(std::exp(-0.5 * mu * tau));
    k1 += g / std::abs(mu - 4.0 * Lam) + g / std::abs(mu + 4.0 * Lam);
    k2 += 1.0 / std::pow(std::abs(mu + 2.0 * Lam), 3) + 1.0 / std::pow(std::abs(mu - 2.0 * Lam), 3);
  }
  if (has_s) {
    const double mu = b.mu[b.m];
    const double g = geo(std::exp(0.5 * mu * tau));
    k1 += g / std::abs(mu - 4.0 * Lam) + g / std::abs(mu + 4.0 * Lam);
    k2 += 1.0 / std::pow(std::abs(mu + 2.0 * Lam), 3) + 1.0 / std::pow(std::abs(mu - 2.0 * Lam), 3);
  }
  KConstants kc;
  const double G2 = bounds.sup_gradF * bounds.sup_gradF;
  kc.K1 = G2 == 0.0 ? 0.0 : 12.0 * N * N * G2 * std::exp(2.0 * Lam * tau) * k1;
  const double F2 = bounds.sup_F * bounds.sup_F;
  kc.K2 = F2 == 0.0 ? 0.0 : 96.0 * F2 * params.noise.sigma_sq_sum() * k2;
  return kc;
}

RhoSolution solve_rho(double K1, double K2, double mu, double tau, int n_t) {
  if (n_t < 16) fail(Errc::invalid_argument, "solve_rho needs n_t >= 16");
  if (!(mu > 0.0) || !(tau > 0.0)) fail(Errc::invalid_argument, "solve_rho needs mu > 0 and tau > 0");
  if (!std::isfinite(K1) || !std::isfinite(K2)) fail(Errc::invalid_argument, "K1, K2 must be finite");
  RhoSolution rs;
  rs.K1 = K1;
  rs.K2 = K2;
  rs.mu = mu;
  rs.tau = tau;
  rs.neumann_number = K1 * (4.0 / mu) * (1.0 - std::exp(-0.25 * mu * tau));
  rs.neumann_ok = rs.neumann_number < 1.0;
  const int n = n_t + 1;
  const double h = tau / n_t;
  rs.t.resize(n);
  for (int i = 0; i < n; ++i) rs.t[i] = i * h;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double w = (k == 0 || k == n - 1) ? 0.5 * h : h;
      A(i, k) = w * std::exp(-0.5 * mu * std::abs(rs.t[i] - rs.t[k]));
    }
  const Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n) - K1 * A;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
  rs.rcond = lu.rcond();
  if (!(rs.rcond > 1e-13))
    fail(Errc::singular_system, "I - K1 A is numerically singular (rcond " + std::to_string(rs.rcond) + ")");
  const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, K2);
  const Eigen::VectorXd rho = lu.solve(rhs);
  rs.rho.assign(rho.data(), rho.data() + n);
  rs.residual = (S * rho - rhs).cwiseAbs().maxCoeff();
  return rs;
}

DerivativeSolve solve_with_derivative(const IhrieConfig& cfg_in, const CocycleParams& params,
                                      std::span<const WienerGrid> ensemble, const Drift& F,
                                      const MalliavinConfig& mc) {
  IhrieConfig cfg = cfg_in;
  if (cfg.anderson) fail(Errc::invalid_argument, "derivative co-iteration needs plain Picard (anderson = false)");
  const IhrieLayout L = make_layout(cfg);
  const int K = params.basis.K;
  for (const auto& g : ensemble) check_path(L, g, K);
  if (mc.r_stride < 1) fail(Errc::invalid_argument, "r_stride must be >= 1");
  if (mc.store_periods < 1 || mc.store_periods > 2) fail(Errc::invalid_argument, "store_periods must be 1 or 2");

  DerivativeSolve out;
  out.solve = solve_fixed_point(cfg, params, ensemble, F);
  const int iters = out.solve.iterations;

  MalliavinField& M = out.DY;
  M.K = K;
  M.n_t = L.n_t;
  M.n_store = mc.store_periods * L.n_t;
  M.dt = L.dt;
  M.r_stride = mc.r_stride;
  const std::int64_t r0 = grid_index(mc.r_min, L.dt, "r_min");
  const std::int64_t r1 = grid_index(mc.r_max, L.dt, "r_max");
  if (r1 <= r0) fail(Errc::invalid_argument, "r_max must exceed r_min");
  if (r0 < L.lo || r1 > L.hi) fail(Errc::out_of_extent, "r range leaves the frame");
  for (std::int64_t jr = r0; jr < r1; jr += mc.r_stride) M.r_nodes.push_back(jr);
  const std::size_t R = M.r_nodes.size();
  const std::size_t S = ensemble.size();
  M.D.assign(S, std::vector<double>(static_cast<std::size_t>(K) * R * M.n_store * K, 0.0));

  const double dr = mc.r_stride * L.dt;
  std::vector<std::vector<double>> hist(S, std::vector<double>(static_cast<std::size_t>(iters) * L.n_t, 0.0));
  std::vector<std::int64_t> flags(S, 0);

  parallel_for(S, [&](std::size_t s) {
    const Frame fr = full_frame(L, ensemble[s]);
    const std::int64_t n = fr.n, nw = fr.n_w;
    const double dt = L.dt;
    const detail::KernelPlan plan = detail::build_plan(params, fr);
    const std::size_t len = static_cast<std::size_t>(n * K);
    std::vector<double> Y(len, 0.0), Ynext(len), fv(len), gv(len), Dn(len);
    std::vector<double> Am(static_cast<std::size_t>(n) * K * K);
    std::vector<double> DY(static_cast<std::size_t>(K) * R * len, 0.0);
    std::vector<double> G(static_cast<std::size_t>(n)), scratch, u, d;
    detail::DriftScratch ds;

    for (int it = 0; it < iters; ++it) {
      detail::drift_values(params.basis, F, fr, Y.data(), fv.data(), ds);
      detail::kernel_apply(params, fr, plan, fv.data(), Ynext.data(), scratch);
      for (std::int64_t p = 0; p < n; ++p)
        grad_matrix(params.basis, F, static_cast<double>(fr.lo + p) * dt, Y.data() + p * K,
                    Am.data() + static_cast<std::size_t>(p) * K * K, u, d);
      double* hrow = hist[s].data() + static_cast<std::size_t>(it) * L.n_t;

      for (int qj = 0; qj < K; ++qj) {
        const bool st = params.basis.stable(qj);
        const double sg = params.noise.sigma[qj];
        const std::size_t base = static_cast<std::size_t>(qj) * n;
        // forward G[p] = sum_{i<=p} E(p,i) F_i dt, or backward sum_{i>=p}
        if (st) {
          G[0] = fv[qj] * dt;
          for (std::int64_t p = 1; p < n; ++p) G[p] = plan.step[base + p] * G[p - 1] + fv[p * K + qj] * dt;
        } else {
          G[n - 1] = fv[(n - 1) * K + qj] * dt;
          for (std::int64_t p = n - 2; p >= 0; --p) G[p] = plan.step[base + p] * G[p + 1] + fv[p * K + qj] * dt;
        }
        for (std::size_t ri = 0; ri < R; ++ri) {
          double* D = DY.data() + (static_cast<std::size_t>(qj) * R + ri) * len;
          for (std::int64_t p = 0; p < n; ++p) {
            const double* A = Am.data() + static_cast<std::size_t>(p) * K * K;
            for (int q = 0; q < K; ++q) {
              double a = 0.0;
              for (int k = 0; k < K; ++k) a += A[q * K + k] * D[p * K + k];
              gv[p * K + q] = a;
            }
          }
          detail::kernel_apply(params, fr, plan, gv.data(), Dn.data(), scratch);

          const std::int64_t rp = M.r_nodes[ri] - fr.lo;
          auto direct = [&](std::int64_t p) {
            double acc = 0.0;
            bool bd = false;
            if (st) {
              for (std::int64_t i = std::max<std::int64_t>(0, p - nw); i <= p; ++i) {
                const double w = (i == p || i == p - nw) ? 0.5 : 1.0;
                acc += w * dphiN_idx(params, qj, M.r_nodes[ri], p - i, fr.lo + i, fr.path, &bd) * fv[i * K + qj];
                if (bd) ++flags[s];
              }
              return acc * dt;
            }
            for (std::int64_t i = p; i <= std::min(n - 1, p + nw); ++i) {
              const double w = (i == p || i == p + nw) ? 0.5 : 1.0;
              acc += w * dphiN_idx(params, qj, M.r_nodes[ri], p - i, fr.lo + i, fr.path, &bd) * fv[i * K + qj];
              if (bd) ++flags[s];
            }
            return -acc * dt;
          };
          if (st && rp >= 0) {
            double E = 1.0;  // E(p, rp)
            for (std::int64_t p = rp + 1; p <= std::min(n - 1, rp + nw); ++p) {
              E *= plan.step[base + p];
              if (plan.capped[base + p]) {
                Dn[p * K + qj] += direct(p);
                continue;
              }
              const std::int64_t p0 = p - nw;
              double S0 = G[rp];
              if (p0 >= 1) S0 -= std::exp(log_phi_idx(params, qj, rp - p0 + 1, fr.lo + p0 - 1, fr.path)) * G[p0 - 1];
              if (p0 >= 0)
                S0 -= 0.5 * std::exp(log_phi_idx(params, qj, rp - p0, fr.lo + p0, fr.path)) * fv[p0 * K + qj] * dt;
              Dn[p * K + qj] += sg * E * S0;
            }
          } else if (!st && rp + 1 <= n - 1) {
            const std::int64_t a = rp + 1;
            double E = 1.0;  // E(p, a)
            for (std::int64_t p = std::min(rp, n - 1); p >= std::max<std::int64_t>(0, a - nw); --p) {
              E *= plan.step[base + p];
              if (plan.capped[base + p]) {
                Dn[p * K + qj] += direct(p);
                continue;
              }
              const std::int64_t b1 = p + nw;
              double S0 = G[a];
              if (b1 + 1 <= n - 1) S0 -= std::exp(log_phi_idx(params, qj, a - b1 - 1, fr.lo + b1 + 1, fr.path)) * G[b1 + 1];
              if (b1 <= n - 1)
                S0 -= 0.5 * std::exp(log_phi_idx(params, qj, a - b1, fr.lo + b1, fr.path)) * fv[b1 * K + qj] * dt;
              Dn[p * K + qj] += sg * E * S0;
            }
          }
          for (int t = 0; t < L.n_t; ++t) {
            const std::size_t o = static_cast<std::size_t>((t - L.lo) * K);
            double a = 0.0;
            for (int q = 0; q < K; ++q) a += (Dn[o + q] - D[o + q]) * (Dn[o + q] - D[o + q]);
            hrow[t] += dr * a;
          }
          std::copy(Dn.begin(), Dn.end(), D);
        }
      }
      Y.swap(Ynext);
    }
    for (int qj = 0; qj < K; ++qj)
      for (std::size_t ri = 0; ri < R; ++ri) {
        const double* D = DY.data() + (static_cast<std::size_t>(qj) * R + ri) * len;
        for (int t = 0; t < M.n_store; ++t)
          std::copy_n(D + (t - L.lo) * K, K, M.D[s].data() + M.index(qj, ri, t));
      }
  });

  for (auto f : flags) out.boundary_flags += f;
  std::vector<double> col(S), mean(static_cast<std::size_t>(L.n_t));
  for (int it = 0; it < iters; ++it) {
    for (int t = 0; t < L.n_t; ++t) {
      for (std::size_t s = 0; s < S; ++s) col[s] = hist[s][static_cast<std::size_t>(it) * L.n_t + t];
      mean[t] = S ? pairwise_sum(col.data(), S) / static_cast<double>(S) : 0.0;
    }
    out.dy_history.push_back(weighted_norm_curve(mean, params.Lambda, L.dt));
  }
  return out;
}

namespace {

double sq(const double* a, int K) {
  double s = 0.0;
  for (int q = 0; q < K; ++q) s += a[q] * a[q];
  return s;
}

double sq_diff(const double* a, const double* b, int K) {
  double s = 0.0;
  for (int q = 0; q < K; ++q) {
    const double x = (a ? a[q] : 0.0) - (b ? b[q] : 0.0);
    s += x * x;
  }
  return s;
}

}  // namespace

SobolevStats malliavin_sobolev_stats(const MalliavinField& M, double Lambda, std::span<const int> delta_steps) {
  SobolevStats st;
  const std::size_t S = M.n_samples(), R = M.r_nodes.size();
  const double dr = M.r_stride * M.dt;
  st.D_norm.assign(static_cast<std::size_t>(M.n_t), 0.0);
  std::vector<double> col(S);
  for (int t = 0; t < M.n_t; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = 0.0;
      for (int qj = 0; qj < M.K; ++qj)
        for (std::size_t ri = 0; ri < R; ++ri) a += sq(M.at(s, qj, ri, t), M.K);
      col[s] = a * dr;
    }
    const double mean = S ? pairwise_sum(col.data(), S) / static_cast<double>(S) : 0.0;
    st.D_norm[t] = std::exp(-2.0 * Lambda * t * M.dt) * mean;
  }
  const std::int64_t Ri = static_cast<std::int64_t>(R);
  for (int d : delta_steps) {
    if (d < 1) fail(Errc::invalid_argument, "delta steps must be >= 1");
    const double delta = d * dr;
    double sup = 0.0;
    for (int t = 0; t < M.n_t; ++t) {
      for (std::size_t s = 0; s < S; ++s) {
        double a = 0.0;
        for (int qj = 0; qj < M.K; ++qj)
          for (std::int64_t ri = -d; ri < Ri; ++ri) {
            // D vanishes outside the r grid
            const double* lo = ri >= 0 ? M.at(s, qj, static_cast<std::size_t>(ri), t) : nullptr;
            const double* hi = ri + d < Ri ? M.at(s, qj, static_cast<std::size_t>(ri + d), t) : nullptr;
            a += sq_diff(hi, lo, M.K);
          }
        col[s] = a * dr / delta;
      }
      const double mean = S ? pairwise_sum(col.data(), S) / static_cast<double>(S) : 0.0;
      sup = std::max(sup, std::exp(-2.0 * Lambda * t * M.dt) * mean);
    }
    st.deltas.push_back(delta);
    st.modulus.push_back(sup);
  }
  return st;
}

ShiftNormGap shift_norm_preservation(const PeriodicField& Y, const MalliavinField& M, int h) {
  ShiftNormGap g;
  if (h < 0) fail(Errc::invalid_argument, "shift must be >= 0");
  if (Y.n_samples() != M.n_samples()) fail(Errc::dimension_mismatch, "Y and DY sample counts");
  if (h == 0) return g;
  if (h >= M.n_store) fail(Errc::out_of_extent, "shift leaves the stored derivative range");
  const std::size_t S = M.n_samples(), R = M.r_nodes.size();
  const double dr = M.r_stride * M.dt;
  auto x = [&](std::size_t s, int t) {
    double a = 0.0;
    for (int qj = 0; qj < M.K; ++qj)
      for (std::size_t ri = 0; ri < R; ++ri) a += sq(M.at(s, qj, ri, t), M.K);
    return sq(Y.at(s, t), M.K) + a * dr;
  };
  const double n = static_cast<double>(S);
  for (int t = 0; t + h < M.n_store && t < M.n_t; ++t) {
    double ma = 0, mb = 0, va = 0, vb = 0;
    std::vector<double> a(S), b(S);
    for (std::size_t s = 0; s < S; ++s) {
      a[s] = x(s, t + h);
      b[s] = x(s, t);
    }
    ma = pairwise_sum(a.data(), S) / n;
    mb = pairwise_sum(b.data(), S) / n;
    for (std::size_t s = 0; s < S; ++s) {
      va += (a[s] - ma) * (a[s] - ma);
      vb += (b[s] - mb) * (b[s] - mb);
    }
    const double se = S > 1 ? std::sqrt((va + vb) / ((n - 1.0) * n)) : 0.0;
    const double diff = std::abs(ma - mb);
    if (mb > 0.0) g.rel_gap = std::max(g.rel_gap, diff / mb);
    if (se > 0.0) g.max_z = std::max(g.max_z, diff / se);
    else if (diff > 0.0) g.max_z = std::numeric_limits<double>::infinity();
  }
  return g;
}

namespace {

std::FILE* open_out(const std::string& file) {
  std::FILE* f = std::fopen(file.c_str(), "w");
  if (!f) fail(Errc::io_error, "cannot open " + file);
  return f;
}

void close_out(std::FILE* f, const std::string& file) {
  if (std::fclose(f) != 0) fail(Errc::io_error, "write failed for " + file);
}

}  // namespace

void write_malliavin_csv(const SobolevStats& st, const RhoSolution& rho, const std::string& file) {
  std::FILE* f = open_out(file);
  std::fprintf(f, "t_index,D_norm,rho_bound,ok_flag\n");
  for (std::size_t t = 0; t < st.D_norm.size(); ++t) {
    const double rb = t < rho.rho.size() ? rho.rho[t] : std::numeric_limits<double>::quiet_NaN();
    std::fprintf(f, "%zu,%.17g,%.17g,%d\n", t, st.D_norm[t], rb, st.D_norm[t] <= rb ? 1 : 0);
  }
  close_out(f, file);
}

void write_equicontinuity_csv(const SobolevStats& st, const std::string& file) {
  std::FILE* f = open_out(file);
  std::fprintf(f, "delta,modulus\n");
  for (std::size_t i = 0; i < st.deltas.size(); ++i) std::fprintf(f, "%.17g,%.17g\n", st.deltas[i], st.modulus[i]);
  close_out(f, file);
}

void write_rho_csv(const RhoSolution& rho, const std::string& file) {
  std::FILE* f = open_out(file);
  std::fprintf(f, "t,rho\n");
  for (std::size_t i = 0; i < rho.rho.size(); ++i) std::fprintf(f, "%.17g,%.17g\n", rho.t[i], rho.rho[i]);
  close_out(f, file);
}

}  // namespace rps
