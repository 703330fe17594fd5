#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rps_spde/semiflow.hpp"
#include "test_util.hpp"

using namespace rps;
using rps::test::code_of;
using rps::test::flagship_params;

namespace {

CocycleParams one_mode(double mu) {
  const double c = mu + std::numbers::pi * std::numbers::pi;
  return make_params(build_basis(DomainSpec{0.0, 1.0, 64, c}, 1), NoiseSpec::explicit_values({0.0}), 0.0, INFINITY);
}

double mode1_of_one(const SpectralBasis& b) {
  double s = 0.0;
  for (int i = 0; i < b.n_x(); ++i) s += b.w[i] * std::sqrt(2.0) * std::sin(std::numbers::pi * b.x[i]);
  return s;
}

}  // namespace

TEST(Semiflow, SchemeNames) {
  EXPECT_EQ(parse_scheme("exponential-euler"), Scheme::exponential_euler);
  EXPECT_EQ(parse_scheme("midpoint-quadrature"), Scheme::midpoint_quadrature);
  EXPECT_STREQ(scheme_name(Scheme::midpoint_quadrature), "midpoint-quadrature");
  EXPECT_EQ(code_of([] { parse_scheme("rk4"); }), Errc::invalid_argument);
}

TEST(Semiflow, ZeroDriftIsCocycle) {
  const CocycleParams p = flagship_params(4, 32);
  const WienerGrid g = generate_path(4, 1.0 / 256, -512, 512, 4, 4);
  Field psi(4);
  for (int q = 0; q < 4; ++q) psi[q] = 0.5 - 0.2 * q;
  MildSolverConfig cfg;
  for (Scheme s : {Scheme::exponential_euler, Scheme::midpoint_quadrature}) {
    cfg.scheme = s;
    const Field u = integrate_mild(psi, -0.5, 0.75, PathView(g), p, *make_zero_drift(), cfg);
    EXPECT_EQ(u, phi_apply(p, 1.25, -0.5, PathView(g), psi));
  }
}

TEST(Semiflow, ConvergenceOrder) {
  // constant forcing, sigma = 0: u(T) = f (e^{mu T} - 1) / mu
  const CocycleParams p = one_mode(-2.0);
  const WienerGrid g = generate_path(1, 1.0 / 1024, 0, 1024, 1, 0);
  const double f = 1.5 * mode1_of_one(p.basis);
  const double exact = f * (std::exp(-2.0) - 1.0) / -2.0;
  auto err = [&](Scheme s, double h) {
    MildSolverConfig cfg;
    cfg.scheme = s;
    cfg.dt_flow = h;
    return std::abs(integrate_mild(Field(1), 0.0, 1.0, PathView(g), p, *make_constant_drift(1.5), cfg)[0] - exact);
  };
  const double e1 = err(Scheme::exponential_euler, 1.0 / 64), e2 = err(Scheme::exponential_euler, 1.0 / 128);
  EXPECT_NEAR(e1 / e2, 2.0, 0.1);
  const double m1 = err(Scheme::midpoint_quadrature, 1.0 / 64), m2 = err(Scheme::midpoint_quadrature, 1.0 / 128);
  EXPECT_NEAR(m1 / m2, 4.0, 0.2);
  EXPECT_LT(m2, e2);
}

TEST(Semiflow, FlowProperty) {
  const CocycleParams p = flagship_params(4, 32);
  const WienerGrid g = generate_path(4, 1.0 / 256, -256, 512, 8, 1);
  const auto F = make_tanh_sine_drift(0.5, 1.0);
  Field psi(4);
  psi[0] = 0.3;
  psi[2] = -0.1;
  MildSolverConfig cfg;
  cfg.scheme = Scheme::midpoint_quadrature;
  const PathView v(g);
  const Field whole = integrate_mild(psi, -0.5, 1.0, v, p, *F, cfg);
  const Field mid = integrate_mild(psi, -0.5, 0.25, v, p, *F, cfg);
  const Field two = integrate_mild(mid, 0.25, 1.0, v, p, *F, cfg);
  for (int q = 0; q < 4; ++q) EXPECT_NEAR(two[q], whole[q], 1e-13 * (1.0 + std::abs(whole[q])));
}

TEST(Semiflow, ArgumentChecks) {
  const CocycleParams p = flagship_params(4, 32);
  const WienerGrid g = generate_path(4, 1.0 / 256, -256, 256, 8, 1);
  MildSolverConfig cfg;
  const auto F = make_zero_drift();
  EXPECT_EQ(code_of([&] { integrate_mild(Field(4), 0.5, 0.0, PathView(g), p, *F, cfg); }), Errc::negative_time);
  cfg.dt_flow = 3.0 / 256;
  EXPECT_EQ(code_of([&] { integrate_mild(Field(4), 0.0, 0.5, PathView(g), p, *F, cfg); }), Errc::grid_misaligned);
  cfg.dt_flow = 1.0 / 512;
  EXPECT_EQ(code_of([&] { integrate_mild(Field(4), 0.0, 0.5, PathView(g), p, *F, cfg); }), Errc::grid_misaligned);
  cfg.dt_flow = 1.0 / 256;
  EXPECT_EQ(code_of([&] { integrate_mild(Field(3), 0.0, 0.5, PathView(g), p, *F, cfg); }), Errc::dimension_mismatch);
  EXPECT_EQ(code_of([&] { integrate_mild(Field(4), 0.0, 2.0, PathView(g), p, *F, cfg); }), Errc::out_of_extent);
}

TEST(Semiflow, BlowUpDetected) {
  const CocycleParams p = flagship_params(4, 32);
  const WienerGrid g = generate_path(4, 1.0 / 256, 0, 256, 8, 1);
  const auto F = make_function_drift([](double, double u) { return 50.0 * u * u * u; },
                                     [](double, double u) { return 150.0 * u * u; }, "cubic");
  Field psi(4);
  psi[0] = 5.0;
  EXPECT_EQ(code_of([&] { integrate_mild(psi, 0.0, 1.0, PathView(g), p, *F, MildSolverConfig{}); }),
            Errc::non_finite_drift);
}

TEST(Semiflow, VerifyZeroSolution) {
  const CocycleParams p = flagship_params(4, 32);
  IhrieConfig c;
  c.n_t = 32;
  const IhrieLayout L = make_layout(c);
  const auto ens = sample_ensemble(p.noise, L.dt, L.t_min(), L.t_max(), 2, 1);
  const SolveResult r = solve_fixed_point(c, p, ens, *make_zero_drift());
  MildSolverConfig flow;
  flow.dt_flow = c.dt();
  const VerifyResult v = verify_rps(r.Y, p, ens, *make_zero_drift(), flow, 4);
  EXPECT_EQ(v.err_L2, 0.0);
  EXPECT_EQ(v.per_t.size(), 8u);
  EXPECT_EQ(code_of([&] { verify_rps(r.Y, p, ens, *make_zero_drift(), flow, 0); }), Errc::invalid_argument);
}
