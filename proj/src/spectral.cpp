#include "rps_spde/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rps_spde/error.hpp"

namespace rps {

Field Field::unit(std::size_t K, int k) {
  Field f(K);
  f.coeffs.at(static_cast<std::size_t>(k - 1)) = 1.0;
  return f;
}

double Field::norm_sq() const {
  double s = 0.0;
  for (double c : coeffs) s += c * c;
  return s;
}

SpectralBasis build_basis(const DomainSpec& domain, int K_m) {
  if (K_m < 1) fail(Errc::invalid_argument, "K_m must be >= 1");
  if (!(domain.x_min < domain.x_max)) fail(Errc::invalid_argument, "x_min must be < x_max");
  if (domain.n_x < 8) fail(Errc::grid_too_coarse, "n_x must be >= 8");
  if (domain.n_x < 4 * K_m)
    fail(Errc::grid_too_coarse,
         "n_x = " + std::to_string(domain.n_x) + " < 4*K_m = " + std::to_string(4 * K_m));

  SpectralBasis b;
  b.domain = domain;
  b.K = K_m;
  const double len = domain.x_max - domain.x_min;
  const double pi = std::numbers::pi;
  b.mu.resize(K_m);
  for (int q = 0; q < K_m; ++q) {
    const double kp = (q + 1) * pi / len;
    b.mu[q] = domain.c - kp * kp;
    if (std::abs(b.mu[q]) < 1e-9)
      fail(Errc::zero_eigenvalue, "mu_" + std::to_string(q + 1) + " is within 1e-9 of zero");
  }
  b.m = 0;
  for (double v : b.mu)
    if (v > 0.0) ++b.m;

  const int n = domain.n_x;
  const double h = len / (n - 1);
  b.x.resize(n);
  b.w.assign(n, h);
  b.w.front() = b.w.back() = 0.5 * h;
  for (int i = 0; i < n; ++i) b.x[i] = domain.x_min + i * h;
  b.x.back() = domain.x_max;

  const double amp = std::sqrt(2.0 / len);
  b.phi.resize(static_cast<std::size_t>(K_m) * n);
  double cmax = 0.0;
  for (int q = 0; q < K_m; ++q) {
    const double kp = (q + 1) * pi / len;
    double g2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double arg = kp * (b.x[i] - domain.x_min);
      // exact zeros at the Dirichlet ends
      b.phi[static_cast<std::size_t>(q) * n + i] = (i == 0 || i == n - 1) ? 0.0 : amp * std::sin(arg);
      const double d = amp * kp * std::cos(arg);
      g2 += b.w[i] * d * d;
    }
    cmax = std::max(cmax, std::sqrt(g2) / std::sqrt(std::abs(b.mu[q])));
  }
  b.grad_constant = cmax;
  return b;
}

double spectral_gap(const SpectralBasis& basis) {
  if (basis.m == 0) return -basis.mu[0];
  if (basis.m >= basis.K) return basis.mu[basis.m - 1];
  return std::min(-basis.mu[basis.m], basis.mu[basis.m - 1]);
}

void project_into(const double* v, const SpectralBasis& basis, double* coeffs) {
  const int n = basis.n_x();
  for (int q = 0; q < basis.K; ++q) {
    const double* p = basis.mode(q);
    double s = 0.0;
    for (int i = 1; i < n - 1; ++i) s += basis.w[i] * v[i] * p[i];
    coeffs[q] = s;
  }
}

void reconstruct_into(const double* coeffs, const SpectralBasis& basis, double* v) {
  const int n = basis.n_x();
  for (int i = 0; i < n; ++i) v[i] = 0.0;
  for (int q = 0; q < basis.K; ++q) {
    const double c = coeffs[q];
    if (c == 0.0) continue;
    const double* p = basis.mode(q);
    for (int i = 0; i < n; ++i) v[i] += c * p[i];
  }
}

Field project(std::span<const double> grid_values, const SpectralBasis& basis) {
  if (grid_values.size() != static_cast<std::size_t>(basis.n_x()))
    fail(Errc::dimension_mismatch, "grid function has " + std::to_string(grid_values.size()) +
                                       " values, basis grid has " + std::to_string(basis.n_x()));
  Field f(basis.K);
  project_into(grid_values.data(), basis, f.coeffs.data());
  return f;
}

std::vector<double> reconstruct(const Field& field, const SpectralBasis& basis) {
  if (field.size() != static_cast<std::size_t>(basis.K))
    fail(Errc::dimension_mismatch, "field has " + std::to_string(field.size()) +
                                       " modes, basis has " + std::to_string(basis.K));
  std::vector<double> v(basis.n_x());
  reconstruct_into(field.coeffs.data(), basis, v.data());
  return v;
}

double grid_l2_norm(std::span<const double> v, const SpectralBasis& basis) {
  if (v.size() != static_cast<std::size_t>(basis.n_x()))
    fail(Errc::dimension_mismatch, "grid function size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += basis.w[i] * v[i] * v[i];
  return std::sqrt(s);
}

Field heat_semigroup(const SpectralBasis& basis, double t, const Field& u) {
  if (t < 0.0) fail(Errc::negative_time, "heat semigroup needs t >= 0");
  if (u.size() != static_cast<std::size_t>(basis.K)) fail(Errc::dimension_mismatch, "field size");
  Field out(basis.K);
  for (int q = 0; q < basis.K; ++q) out[q] = std::exp(basis.mu[q] * t) * u[q];
  return out;
}

void nemytskii_into(const Drift& F, double t, const double* coeffs, const SpectralBasis& basis,
                    double* grid_u, double* grid_f, double* out) {
  const int n = basis.n_x();
  reconstruct_into(coeffs, basis, grid_u);
  F.eval(t, grid_u, grid_f, static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(grid_f[i]))
      fail(Errc::non_finite_drift, "F(t, u(x)) not finite at t = " + std::to_string(t) +
                                       ", x = " + std::to_string(basis.x[i]));
  project_into(grid_f, basis, out);
}

Field nemytskii(const Drift& F, double t, const Field& u, const SpectralBasis& basis) {
  if (u.size() != static_cast<std::size_t>(basis.K)) fail(Errc::dimension_mismatch, "field size");
  std::vector<double> gu(basis.n_x()), gf(basis.n_x());
  Field out(basis.K);
  nemytskii_into(F, t, u.coeffs.data(), basis, gu.data(), gf.data(), out.coeffs.data());
  return out;
}

double nemytskii_mode(const Drift& F, double t, const Field& u, const SpectralBasis& basis, int i) {
  if (i < 1 || i > basis.K) fail(Errc::dimension_mismatch, "mode index out of range");
  return nemytskii(F, t, u, basis)[static_cast<std::size_t>(i - 1)];
}

}  // namespace rps
