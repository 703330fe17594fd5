#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rps_spde/error.hpp"
#include "rps_spde/spectral.hpp"
#include "test_util.hpp"

using namespace rps;
using rps::test::code_of;

namespace {

DomainSpec unit_domain(double c, int n_x = 64) { return DomainSpec{0.0, 1.0, n_x, c}; }

}  // namespace

TEST(Spectral, EigenvaluesMatchClosedForm) {
  // mpmath, 20 digits
  const double ref[8] = {5.1303955989106413812,  -24.478417604357434475, -73.82643960980422757,
                         -142.9136704174297379,  -231.74011002723396547, -340.30575843921691028,
                         -468.61061565337857232, -616.65468166971895161};
  const SpectralBasis b = build_basis(unit_domain(15.0), 8);
  ASSERT_EQ(b.K, 8);
  EXPECT_EQ(b.m, 1);
  for (int q = 0; q < 8; ++q) EXPECT_NEAR(b.mu[q], ref[q], 1e-13 * std::abs(ref[q])) << q;
  EXPECT_NEAR(spectral_gap(b), 5.1303955989106413812, 1e-14);
}

TEST(Spectral, ShiftedDomainEigenvalue) {
  const SpectralBasis b = build_basis(DomainSpec{0.0, 2.0, 64, 1.0}, 4);
  EXPECT_NEAR(b.mu[0], -1.4674011002723396547, 1e-14);
  EXPECT_EQ(b.m, 0);
  EXPECT_NEAR(spectral_gap(b), 1.4674011002723396547, 1e-14);
}

TEST(Spectral, ZeroEigenvalueRejected) {
  const double c = std::numbers::pi * std::numbers::pi;
  EXPECT_EQ(code_of([&] { build_basis(unit_domain(c), 4); }), Errc::zero_eigenvalue);
}

TEST(Spectral, CoarseGridRejected) {
  EXPECT_EQ(code_of([] { build_basis(unit_domain(0.0, 16), 8); }), Errc::grid_too_coarse);
  EXPECT_EQ(code_of([] { build_basis(unit_domain(0.0, 32), 8); }), Errc::ok);
}

TEST(Spectral, DiscreteOrthonormality) {
  const SpectralBasis b = build_basis(unit_domain(15.0, 128), 8);
  double worst = 0.0;
  for (int p = 0; p < b.K; ++p)
    for (int q = 0; q < b.K; ++q) {
      double s = 0.0;
      for (int i = 0; i < b.n_x(); ++i) s += b.w[i] * b.mode(p)[i] * b.mode(q)[i];
      worst = std::max(worst, std::abs(s - (p == q ? 1.0 : 0.0)));
    }
  EXPECT_LE(worst, 1e-14);
}

TEST(Spectral, ProjectSineMode) {
  const SpectralBasis b = build_basis(unit_domain(15.0), 8);
  std::vector<double> u(b.n_x());
  for (int i = 0; i < b.n_x(); ++i) u[i] = 3.0 * std::sin(std::numbers::pi * b.x[i]);
  const Field f = project(u, b);
  EXPECT_NEAR(f[0], 2.1213203435596425732, 1e-13);
  for (int q = 1; q < 8; ++q) EXPECT_NEAR(f[q], 0.0, 1e-13);
  EXPECT_NEAR(grid_l2_norm(u, b), 2.1213203435596425732, 1e-13);
}

TEST(Spectral, ReconstructProjectRoundTrip) {
  const SpectralBasis b = build_basis(unit_domain(15.0), 8);
  Field f(8);
  for (int q = 0; q < 8; ++q) f[q] = std::cos(1.0 + q);
  const Field g = project(reconstruct(f, b), b);
  for (int q = 0; q < 8; ++q) EXPECT_NEAR(g[q], f[q], 1e-13);
}

TEST(Spectral, SizeMismatch) {
  const SpectralBasis b = build_basis(unit_domain(15.0), 8);
  std::vector<double> u(10, 0.0);
  EXPECT_EQ(code_of([&] { project(u, b); }), Errc::dimension_mismatch);
  EXPECT_EQ(code_of([&] { reconstruct(Field(3), b); }), Errc::dimension_mismatch);
}

TEST(Spectral, HeatSemigroup) {
  const SpectralBasis b = build_basis(unit_domain(15.0), 4);
  Field u(4);
  for (int q = 0; q < 4; ++q) u[q] = 1.0 + q;
  const Field v = heat_semigroup(b, 0.1, u);
  for (int q = 0; q < 4; ++q) EXPECT_NEAR(v[q], std::exp(0.1 * b.mu[q]) * u[q], 1e-15 * std::abs(u[q]) * 2);
  EXPECT_EQ(heat_semigroup(b, 0.0, u), u);
  EXPECT_EQ(code_of([&] { heat_semigroup(b, -0.1, u); }), Errc::negative_time);
}

TEST(Spectral, NemytskiiLinearDrift) {
  const SpectralBasis b = build_basis(unit_domain(15.0), 8);
  const auto F = make_linear_drift(-2.5);
  Field u(8);
  for (int q = 0; q < 8; ++q) u[q] = 0.3 / (q + 1);
  const Field f = nemytskii(*F, 0.0, u, b);
  for (int q = 0; q < 8; ++q) EXPECT_NEAR(f[q], -2.5 * u[q], 1e-13);
  EXPECT_NEAR(nemytskii_mode(*F, 0.0, u, b, 3), -2.5 * u[2], 1e-13);
}

TEST(Spectral, NonFiniteDriftReported) {
  const SpectralBasis b = build_basis(unit_domain(15.0), 4);
  const auto F = make_function_drift([](double, double) { return NAN; }, [](double, double) { return 0.0; }, "nan");
  EXPECT_EQ(code_of([&] { nemytskii(*F, 0.0, Field(4), b); }), Errc::non_finite_drift);
}
