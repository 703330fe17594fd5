#include "kernel.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "rps_spde/error.hpp"

namespace rps::detail {

double transfer(const CocycleParams& prm, const Frame& fr, int q, std::int64_t p, std::int64_t i) {
  return std::exp(log_phi_idx(prm, q, p - i, fr.lo + i, fr.path));
}

KernelPlan build_plan(const CocycleParams& prm, const Frame& fr) {
  const int K = prm.basis.K;
  const std::int64_t n = fr.n, nw = fr.n_w;
  const double dt = fr.path.dt();
  fr.path.require(fr.lo, fr.lo + n - 1, "kernel frame");
  KernelPlan pl;
  pl.K = K;
  pl.n = n;
  pl.step.assign(static_cast<std::size_t>(K) * n, 0.0);
  pl.outer.assign(static_cast<std::size_t>(K) * n, 0.0);
  pl.endw.assign(static_cast<std::size_t>(K) * n, 0.0);
  pl.capped.assign(static_cast<std::size_t>(K) * n, 0);
  const double lnN = std::isinf(prm.N_trunc) ? std::numeric_limits<double>::infinity()
                     : prm.N_trunc > 0.0     ? std::log(prm.N_trunc)
                                             : -std::numeric_limits<double>::infinity();
  std::vector<double> b(static_cast<std::size_t>(n)), key(static_cast<std::size_t>(n));
  for (int q = 0; q < K; ++q) {
    const bool st = prm.basis.stable(q);
    for (std::int64_t p = 0; p < n; ++p) {
      const std::size_t a = pl.at(q, p);
      if (st) {
        if (p >= 1) pl.step[a] = transfer(prm, fr, q, p, p - 1);
        if (p - nw - 1 >= 0) pl.outer[a] = transfer(prm, fr, q, p, p - nw - 1);
        if (p - nw >= 0) pl.endw[a] = transfer(prm, fr, q, p, p - nw);
      } else {
        if (p + 1 < n) pl.step[a] = transfer(prm, fr, q, p, p + 1);
        if (p + nw + 1 < n) pl.outer[a] = transfer(prm, fr, q, p, p + nw + 1);
        if (p + nw < n) pl.endw[a] = transfer(prm, fr, q, p, p + nw);
      }
    }
    if (std::isinf(lnN) && lnN > 0) continue;
    // Cap active for (p, i) iff b_p - b_i - Lambda |t_i| > ln N, where
    // b = mu t / 2 + sigma W. Screen with a sliding window minimum.
    const double mu = prm.basis.mu[q], sg = prm.noise.sigma[q];
    for (std::int64_t p = 0; p < n; ++p) {
      const std::int64_t j = fr.lo + p;
      const double t = static_cast<double>(j) * dt;
      b[p] = 0.5 * mu * t + sg * fr.path.value(q, j);
      key[p] = b[p] + prm.Lambda * std::abs(t);
    }
    std::deque<std::int64_t> dq;
    auto flag = [&](std::int64_t p, std::int64_t imin) {
      const double gap = b[p] - key[imin];
      const double tol = 1e-9 * (1.0 + std::abs(b[p]) + std::abs(key[imin]));
      if (gap > lnN - tol) {
        pl.capped[pl.at(q, p)] = 1;
        ++pl.capped_total;
      }
    };
    if (st) {
      for (std::int64_t p = 0; p < n; ++p) {
        while (!dq.empty() && key[dq.back()] >= key[p]) dq.pop_back();
        dq.push_back(p);
        while (dq.front() < p - nw) dq.pop_front();
        flag(p, dq.front());
      }
    } else {
      for (std::int64_t p = n - 1; p >= 0; --p) {
        while (!dq.empty() && key[dq.back()] >= key[p]) dq.pop_back();
        dq.push_back(p);
        while (dq.front() > p + nw) dq.pop_front();
        flag(p, dq.front());
      }
    }
  }
  return pl;
}

double kernel_direct(const CocycleParams& prm, const Frame& fr, const double* g, int q, std::int64_t p) {
  const int K = prm.basis.K;
  const double dt = fr.path.dt();
  const std::int64_t n = fr.n, nw = fr.n_w;
  double s = 0.0;
  if (prm.basis.stable(q)) {
    const std::int64_t i0 = std::max<std::int64_t>(0, p - nw);
    for (std::int64_t i = i0; i <= p; ++i) {
      const double w = (i == p || i == p - nw) ? 0.5 : 1.0;
      s += w * phi_truncated_idx(prm, q, p - i, fr.lo + i, fr.path) * g[i * K + q];
    }
    return s * dt;
  }
  const std::int64_t i1 = std::min<std::int64_t>(n - 1, p + nw);
  for (std::int64_t i = p; i <= i1; ++i) {
    const double w = (i == p || i == p + nw) ? 0.5 : 1.0;
    s += w * phi_truncated_idx(prm, q, p - i, fr.lo + i, fr.path) * g[i * K + q];
  }
  return -s * dt;
}

void kernel_apply(const CocycleParams& prm, const Frame& fr, const KernelPlan& pl, const double* g,
                  double* out, std::vector<double>& G) {
  const int K = prm.basis.K;
  const double dt = fr.path.dt();
  const std::int64_t n = fr.n, nw = fr.n_w;
  G.resize(static_cast<std::size_t>(n));
  for (int q = 0; q < K; ++q) {
    const std::size_t base = static_cast<std::size_t>(q) * n;
    if (prm.basis.stable(q)) {
      G[0] = g[q] * dt;
      for (std::int64_t p = 1; p < n; ++p) G[p] = pl.step[base + p] * G[p - 1] + g[p * K + q] * dt;
      for (std::int64_t p = 0; p < n; ++p) {
        const std::int64_t p0 = p - nw;
        double s = G[p] - 0.5 * g[p * K + q] * dt;
        if (p0 >= 1) s -= pl.outer[base + p] * G[p0 - 1];
        if (p0 >= 0) s -= 0.5 * pl.endw[base + p] * g[p0 * K + q] * dt;
        out[p * K + q] = s;
      }
    } else {
      G[n - 1] = g[(n - 1) * K + q] * dt;
      for (std::int64_t p = n - 2; p >= 0; --p) G[p] = pl.step[base + p] * G[p + 1] + g[p * K + q] * dt;
      for (std::int64_t p = 0; p < n; ++p) {
        const std::int64_t p1 = p + nw;
        double s = G[p] - 0.5 * g[p * K + q] * dt;
        if (p1 + 1 <= n - 1) s -= pl.outer[base + p] * G[p1 + 1];
        if (p1 <= n - 1) s -= 0.5 * pl.endw[base + p] * g[p1 * K + q] * dt;
        out[p * K + q] = -s;
      }
    }
    if (pl.capped_total > 0)
      for (std::int64_t p = 0; p < n; ++p)
        if (pl.capped[base + p]) out[p * K + q] = kernel_direct(prm, fr, g, q, p);
  }
}

void drift_values(const SpectralBasis& basis, const Drift& F, const Frame& fr, const double* Y,
                  double* fvals, DriftScratch& ds) {
  const int K = basis.K;
  ds.u.resize(basis.n_x());
  ds.f.resize(basis.n_x());
  const double dt = fr.path.dt();
  for (std::int64_t p = 0; p < fr.n; ++p) {
    const double t = static_cast<double>(fr.lo + p) * dt;
    nemytskii_into(F, t, Y + p * K, basis, ds.u.data(), ds.f.data(), fvals + p * K);
  }
}

}  // namespace rps::detail
