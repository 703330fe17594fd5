#pragma once

#include <span>
#include <vector>

#include "rps_spde/drift.hpp"

namespace rps {

// L = d^2/dx^2 + c on (x_min, x_max), Dirichlet.
struct DomainSpec {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_x = 128;
  double c = 0.0;

  bool operator==(const DomainSpec&) const = default;
};

// Spectral coefficients u^k = <u, phi_k>; coeffs[q] holds mode k = q + 1.
struct Field {
  std::vector<double> coeffs;

  Field() = default;
  explicit Field(std::size_t K) : coeffs(K, 0.0) {}
  explicit Field(std::vector<double> c) : coeffs(std::move(c)) {}
  static Field unit(std::size_t K, int k);

  std::size_t size() const { return coeffs.size(); }
  double& operator[](std::size_t q) { return coeffs[q]; }
  double operator[](std::size_t q) const { return coeffs[q]; }
  double norm_sq() const;
  bool operator==(const Field&) const = default;
};

struct SpectralBasis {
  DomainSpec domain;
  int K = 0;           // mode count K_m
  int m = 0;           // number of positive eigenvalues
  std::vector<double> mu;   // mu[q] = c - ((q+1) pi / len)^2
  std::vector<double> x;    // grid nodes, endpoints included
  std::vector<double> w;    // trapezoid weights
  std::vector<double> phi;  // K x n_x, row-major
  double grad_constant = 0.0;  // max_k ||phi_k'||_h / sqrt|mu_k|

  int n_x() const { return domain.n_x; }
  const double* mode(int q) const { return phi.data() + static_cast<std::size_t>(q) * domain.n_x; }
  bool stable(int q) const { return q >= m; }
};

SpectralBasis build_basis(const DomainSpec& domain, int K_m);

// min{-mu_{m+1}, mu_m}, or -mu_1 when m = 0
double spectral_gap(const SpectralBasis& basis);

Field project(std::span<const double> grid_values, const SpectralBasis& basis);
std::vector<double> reconstruct(const Field& field, const SpectralBasis& basis);
void project_into(const double* grid_values, const SpectralBasis& basis, double* coeffs);
void reconstruct_into(const double* coeffs, const SpectralBasis& basis, double* grid_values);

double grid_l2_norm(std::span<const double> grid_values, const SpectralBasis& basis);

Field heat_semigroup(const SpectralBasis& basis, double t, const Field& u);

Field nemytskii(const Drift& F, double t, const Field& u, const SpectralBasis& basis);
// i is 1-based
double nemytskii_mode(const Drift& F, double t, const Field& u, const SpectralBasis& basis, int i);

// Scratch-buffer variant used in the inner loops. grid holds n_x doubles.
void nemytskii_into(const Drift& F, double t, const double* coeffs, const SpectralBasis& basis,
                    double* grid_u, double* grid_f, double* out);

}  // namespace rps
