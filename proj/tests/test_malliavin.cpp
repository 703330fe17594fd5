#include <gtest/gtest.h>

#include <cmath>

#include "rps_spde/malliavin.hpp"
#include "test_util.hpp"

using namespace rps;
using rps::test::code_of;
using rps::test::flagship_params;

namespace {

IhrieConfig small_cfg() {
  IhrieConfig c;
  c.n_t = 32;
  c.T_win = 9.0;
  return c;
}

std::vector<WienerGrid> ensemble_for(const IhrieConfig& c, const CocycleParams& p, int n, std::uint64_t seed) {
  const IhrieLayout L = make_layout(c);
  return sample_ensemble(p.noise, L.dt, L.t_min(), L.t_max(), n, seed);
}

}  // namespace

TEST(Malliavin, IndicatorSupport) {
  const CocycleParams p = flagship_params(4, 32);
  const WienerGrid g = generate_path(4, 0.01, -300, 300, 1, 1);
  const PathView v(g);
  // stable mode 2, t = 0.5 from s = 0.1: cells [0.1, 0.6)
  EXPECT_NE(dphiN(p, 2, 0.1, 0.5, 0.1, v), 0.0);
  EXPECT_NE(dphiN(p, 2, 0.59, 0.5, 0.1, v), 0.0);
  EXPECT_EQ(dphiN(p, 2, 0.6, 0.5, 0.1, v), 0.0);
  EXPECT_EQ(dphiN(p, 2, 0.09, 0.5, 0.1, v), 0.0);
  // unstable mode 1, t = -0.5 from s = 0.1: cells [-0.4, 0.1)
  EXPECT_NE(dphiN(p, 1, -0.4, -0.5, 0.1, v), 0.0);
  EXPECT_NE(dphiN(p, 1, 0.09, -0.5, 0.1, v), 0.0);
  EXPECT_EQ(dphiN(p, 1, 0.1, -0.5, 0.1, v), 0.0);
  EXPECT_EQ(dphiN(p, 1, -0.41, -0.5, 0.1, v), 0.0);
  EXPECT_EQ(code_of([&] { dphiN(p, 1, 0.0, 0.5, 0.0, v); }), Errc::wrong_time_sign);
}

TEST(Malliavin, UncappedValueAndFiniteDifference) {
  const CocycleParams p = flagship_params(4, 32, "0.25/k", INFINITY);
  WienerGrid g = generate_path(4, 0.01, -300, 300, 1, 1);
  const double h = 1e-5;
  struct Case {
    int j;
    double r, t, s;
  };
  for (const Case c : {Case{2, 0.2, 0.5, 0.1}, Case{1, -0.3, -0.5, 0.1}, Case{3, -1.0, 1.0, -1.5}}) {
    const double d = dphiN(p, c.j, c.r, c.t, c.s, PathView(g));
    const double phi = phi_mode(p, c.j, c.t, c.s, PathView(g));
    EXPECT_NEAR(d, (c.t > 0 ? 1.0 : -1.0) * p.noise.sigma[c.j - 1] * phi, 1e-15 * std::abs(phi));
    WienerGrid a = g, b = g;
    const std::int64_t jr = grid_index(c.r, 0.01, "r");
    perturb_increment(a, c.j - 1, jr, h);
    perturb_increment(b, c.j - 1, jr, -h);
    const double fd = (phi_truncated(p, c.j, c.t, c.s, PathView(a)) - phi_truncated(p, c.j, c.t, c.s, PathView(b))) / (2 * h);
    EXPECT_NEAR(d, fd, 1e-6 * std::abs(d)) << c.j;
  }
}

TEST(Malliavin, CapKillsDerivative) {
  const CocycleParams p = flagship_params(4, 32, "0.25/k", 1e-6);
  const WienerGrid g = generate_path(4, 0.01, -300, 300, 1, 1);
  EXPECT_EQ(dphiN(p, 2, 0.2, 0.5, 0.1, PathView(g)), 0.0);
  EXPECT_EQ(dphiN(p, 1, -0.3, -0.5, 0.1, PathView(g)), 0.0);
}

TEST(Malliavin, BoundSweep) {
  const CocycleParams p = flagship_params(4, 32);
  const WienerGrid g = generate_path(4, 0.01, -600, 600, 2, 3);
  int violations = 0;
  for (int k = 1; k <= 4; ++k)
    for (int it = 0; it <= 20; ++it)
      for (int is = -10; is <= 10; ++is) {
        const double t = (k == 1 ? -1.0 : 1.0) * it * 0.1;
        if (!check_dphi_bound(p, k, t, is * 0.2, PathView(g)).ok) ++violations;
      }
  EXPECT_EQ(violations, 0);
  const CocycleParams z = flagship_params(4, 32, "0");
  const BoundCheck bc = check_dphi_bound(z, 2, 0.5, 0.0, PathView(g));
  EXPECT_EQ(bc.lhs, 0.0);
  EXPECT_EQ(bc.rhs, 0.0);
  EXPECT_TRUE(bc.ok);
}

TEST(Malliavin, FirstIterateMatchesDirectQuadrature) {
  // one Picard step from Y = 0 leaves only the multiplier term
  for (double N : {10.0, 0.05}) {
    const CocycleParams p = flagship_params(4, 32, "0.25/k", N);
    IhrieConfig c = small_cfg();
    c.N_trunc = N;
    c.max_iters = 1;
    const auto ens = ensemble_for(c, p, 1, 5);
    const auto F = make_tanh_sine_drift(0.5, 1.0);
    MalliavinConfig mc;
    mc.r_min = -1.0;
    mc.r_max = 1.5;
    mc.r_stride = 3;
    const DerivativeSolve ds = solve_with_derivative(c, p, ens, *F, mc);
    PeriodicField zero = ds.solve.Y;
    for (auto& v : zero.traj[0]) v = 0.0;
    double worst = 0.0, scale = 0.0;
    for (int qj = 0; qj < 4; ++qj)
      for (std::size_t ri = 0; ri < ds.DY.r_nodes.size(); ri += 4)
        for (int t = 0; t < c.n_t; t += 7) {
          const double r = ds.DY.r_nodes[ri] * c.dt();
          const Field d = dM(zero, 0, {}, c, p, ens[0], *F, qj + 1, r, t * c.dt());
          const double* f = ds.DY.at(0, qj, ri, t);
          for (int q = 0; q < 4; ++q) {
            worst = std::max(worst, std::abs(d[q] - f[q]));
            scale = std::max(scale, std::abs(d[q]));
          }
        }
    EXPECT_GT(scale, 0.0);
    EXPECT_LE(worst, 1e-12 * scale) << N;
  }
}

TEST(Malliavin, CoIterationMatchesPathFiniteDifference) {
  // D_r Y from the co-iteration against re-solving on perturbed paths
  const CocycleParams p = flagship_params(4, 32);
  IhrieConfig c = small_cfg();
  c.max_iters = 6;
  c.fp_tol = 1e-300;
  const auto ens = ensemble_for(c, p, 1, 9);
  const auto F = make_tanh_sine_drift(0.5, 1.0);
  MalliavinConfig mc;
  mc.r_min = -0.5;
  mc.r_max = 1.0;
  mc.r_stride = 8;
  const DerivativeSolve ds = solve_with_derivative(c, p, ens, *F, mc);
  EXPECT_EQ(ds.boundary_flags, 0);
  const double h = 1e-4;
  double worst = 0.0, scale = 0.0;
  for (int qj = 0; qj < 4; ++qj)
    for (std::size_t ri = 0; ri < ds.DY.r_nodes.size(); ++ri) {
      std::vector<WienerGrid> a = ens, b = ens;
      perturb_increment(a[0], qj, ds.DY.r_nodes[ri], h);
      perturb_increment(b[0], qj, ds.DY.r_nodes[ri], -h);
      const SolveResult ya = solve_fixed_point(c, p, a, *F), yb = solve_fixed_point(c, p, b, *F);
      for (int t = 0; t < c.n_t; t += 3) {
        const double* d = ds.DY.at(0, qj, ri, t);
        for (int q = 0; q < 4; ++q) {
          const double fd = (ya.Y.value(0, t)[q] - yb.Y.value(0, t)[q]) / (2 * h);
          worst = std::max(worst, std::abs(fd - d[q]));
          scale = std::max(scale, std::abs(d[q]));
        }
      }
    }
  EXPECT_GT(scale, 0.0);
  EXPECT_LE(worst, 1e-3 * scale);
}

TEST(Malliavin, DerivativeHistoryShrinks) {
  const CocycleParams p = flagship_params(4, 32);
  const IhrieConfig c = small_cfg();
  const auto ens = ensemble_for(c, p, 2, 9);
  MalliavinConfig mc;
  mc.r_stride = 8;
  const DerivativeSolve ds = solve_with_derivative(c, p, ens, *make_tanh_sine_drift(0.5, 1.0), mc);
  ASSERT_TRUE(ds.solve.converged);
  ASSERT_GE(ds.dy_history.size(), 3u);
  EXPECT_LT(ds.dy_history.back(), 1e-3 * ds.dy_history[1]);
  IhrieConfig aa = c;
  aa.anderson = true;
  EXPECT_EQ(code_of([&] { solve_with_derivative(aa, p, ens, *make_zero_drift(), mc); }), Errc::invalid_argument);
}

TEST(Malliavin, ZeroNoiseHasZeroDerivative) {
  const CocycleParams p = flagship_params(4, 32, "0");
  const IhrieConfig c = small_cfg();
  const auto ens = ensemble_for(c, p, 2, 9);
  MalliavinConfig mc;
  mc.r_stride = 4;
  const DerivativeSolve ds = solve_with_derivative(c, p, ens, *make_tanh_sine_drift(0.5, 1.0), mc);
  const std::vector<int> deltas{1, 2};
  const SobolevStats st = malliavin_sobolev_stats(ds.DY, p.Lambda, deltas);
  for (double v : st.D_norm) EXPECT_EQ(v, 0.0);
  for (double v : st.modulus) EXPECT_EQ(v, 0.0);
  // deterministic periodic Y: shift by one period preserves the norm up to rounding
  const ShiftNormGap g = shift_norm_preservation(ds.solve.Y, ds.DY, c.n_t);
  EXPECT_LE(g.rel_gap, 1e-12);
}

TEST(Malliavin, KConstantsFlagship) {
  // mpmath evaluation with sup|F| = 1.5, sup|dF| = 1
  const CocycleParams p = flagship_params();
  const KConstants k = compute_K1_K2(p, 1.0, FBounds{1.5, 1.0});
  EXPECT_NEAR(k.K1, 73936408.361320192555, 1e-12 * 73936408.361320192555);
  EXPECT_NEAR(k.K2, 0.44299755799414752817, 1e-12);
  EXPECT_EQ(compute_K1_K2(p, 1.0, FBounds{0.0, 1.0}).K2, 0.0);
  EXPECT_EQ(compute_K1_K2(p, 1.0, FBounds{1.5, 0.0}).K1, 0.0);
  EXPECT_EQ(code_of([&] { compute_K1_K2(p, 1.0, FBounds{-1.0, 1.0}); }), Errc::invalid_argument);
}

TEST(Malliavin, RhoWithoutCoupling) {
  const RhoSolution r = solve_rho(0.0, 0.75, 4.0, 1.0, 64);
  ASSERT_EQ(r.rho.size(), 65u);
  for (double v : r.rho) EXPECT_EQ(v, 0.75);
  EXPECT_TRUE(r.neumann_ok);
  for (double v : solve_rho(0.3, 0.0, 4.0, 1.0, 64).rho) EXPECT_EQ(v, 0.0);
}

TEST(Malliavin, RhoNeumannSeries) {
  // K2 + K1 K2 int_0^1 e^{-2|t - s|} ds at t = 0, 1/2, 1
  const RhoSolution r = solve_rho(1e-3, 2.0, 4.0, 1.0, 256);
  EXPECT_LT(r.residual, 1e-10);
  EXPECT_NEAR(r.rho[0], 2.0008646647167634, 1e-6);
  EXPECT_NEAR(r.rho[128], 2.0012642411176573, 1e-6);
  EXPECT_NEAR(r.rho[256], 2.0008646647167634, 1e-6);
  EXPECT_NEAR(r.neumann_number, 1e-3 * (1.0 - std::exp(-1.0)), 1e-18);
}

TEST(Malliavin, RhoSingularSystem) {
  // K1 at the reciprocal of the dominant eigenvalue of the quadrature operator
  const int n_t = 32, n = n_t + 1;
  const double h = 1.0 / n_t;
  std::vector<double> A(n * n), v(n, 1.0), w(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      A[i * n + k] = ((k == 0 || k == n - 1) ? 0.5 * h : h) * std::exp(-2.0 * std::abs(i - k) * h);
  double lam = 0.0;
  for (int it = 0; it < 2000; ++it) {
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] = 0.0;
      for (int k = 0; k < n; ++k) w[i] += A[i * n + k] * v[k];
      nrm = std::max(nrm, std::abs(w[i]));
    }
    lam = nrm;
    for (int i = 0; i < n; ++i) v[i] = w[i] / nrm;
  }
  EXPECT_EQ(code_of([&] { solve_rho(1.0 / lam, 1.0, 4.0, 1.0, n_t); }), Errc::singular_system);
  EXPECT_EQ(code_of([&] { solve_rho(1.0, 1.0, 4.0, 1.0, 8); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([&] { solve_rho(1.0, 1.0, -4.0, 1.0, 32); }), Errc::invalid_argument);
}
