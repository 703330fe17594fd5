#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rps_spde/cocycle.hpp"
#include "rps_spde/drift.hpp"
#include "rps_spde/ihrie.hpp"

namespace rps {

// D^j_r of the mode-j multiplier Phi^N(t, theta_s w) P^j. The derivative is taken
// with respect to the increment of W^j on the cell [r, r + dt), so the indicator is
// s <= r < s + t for stable j (t >= 0) and s + t <= r < s for unstable j (t <= 0).
// boundary is set when the cap ratio lies within 1e-9 of 1.
double dphiN_idx(const CocycleParams& p, int q, std::int64_t jr, std::int64_t jt, std::int64_t js,
                 const PathView& path, bool* boundary = nullptr);
double dphiN(const CocycleParams& p, int j, double r, double t, double s, const PathView& path);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
};

// |D Phi^N P^j| <= 2 sigma_j N e^{mu_j t / 2} e^{Lambda |s|}
BoundCheck check_dphi_bound(const CocycleParams& p, int j, double t, double s, const PathView& path);

// D^j_r M(Y)(t) for one sample by direct quadrature. DY holds D^j_r Y over the
// sample's stored range (node-major, n_nodes x K); empty means DY = 0.
Field dM(const PeriodicField& Y, std::size_t sample, std::span<const double> DY, const IhrieConfig& cfg,
         const CocycleParams& params, const WienerGrid& path, const Drift& F, int j, double r, double t);

struct FBounds {
  double sup_F = 0.0;
  double sup_gradF = 0.0;
};

struct KConstants {
  double K1 = 0.0;
  double K2 = 0.0;
};

KConstants compute_K1_K2(const CocycleParams& params, double tau, const FBounds& bounds);

struct RhoSolution {
  std::vector<double> t;
  std::vector<double> rho;
  double K1 = 0.0, K2 = 0.0, mu = 0.0, tau = 0.0;
  double residual = 0.0;        // max |rho - K1 A rho - K2|
  double neumann_number = 0.0;  // K1 (4/mu)(1 - e^{-mu tau / 4})
  bool neumann_ok = false;      // neumann_number < 1
  double rcond = 0.0;
};

// rho(t) = K1 int_0^tau e^{-mu |t - s| / 2} rho(s) ds + K2 on n_t + 1 trapezoid nodes
RhoSolution solve_rho(double K1, double K2, double mu, double tau, int n_t);

struct MalliavinConfig {
  double r_min = -2.0;
  double r_max = 3.0;
  int r_stride = 1;          // in path steps
  int store_periods = 2;     // D stored for t in [0, store_periods * tau)
};

// D^j_r Y(t) per sample for j = 1..K, r on the r grid, t on the stored nodes.
struct MalliavinField {
  int K = 0;
  int n_t = 0;
  int n_store = 0;
  double dt = 0.0;
  std::vector<std::int64_t> r_nodes;
  int r_stride = 1;
  std::vector<std::vector<double>> D;  // per sample

  std::size_t n_samples() const { return D.size(); }
  std::size_t index(int q_j, std::size_t ri, int t) const {
    return ((static_cast<std::size_t>(q_j) * r_nodes.size() + ri) * n_store + t) * K;
  }
  const double* at(std::size_t sample, int q_j, std::size_t ri, int t) const {
    return D[sample].data() + index(q_j, ri, t);
  }
};

struct DerivativeSolve {
  SolveResult solve;
  MalliavinField DY;
  std::vector<double> dy_history;  // ensemble sup over (j, r, t) of mean squared DY change
  std::int64_t boundary_flags = 0;
};

// Picard iteration for Y with D Y iterated alongside (D Y_0 = 0).
DerivativeSolve solve_with_derivative(const IhrieConfig& cfg, const CocycleParams& params,
                                      std::span<const WienerGrid> ensemble, const Drift& F,
                                      const MalliavinConfig& mc);

struct SobolevStats {
  std::vector<double> D_norm;  // per t in [0, tau)
  std::vector<double> deltas;
  std::vector<double> modulus;  // sup_t e^{-2 Lambda t} sum_j (1/delta) int E||D_{r+delta} - D_r||^2 dr
};

SobolevStats malliavin_sobolev_stats(const MalliavinField& DY, double Lambda, std::span<const int> delta_steps);

struct ShiftNormGap {
  double rel_gap = 0.0;    // worst over t
  double max_z = 0.0;      // worst |difference| / combined standard error
};

// Compares E(||Y(t)||^2 + sum_j int ||D^j_r Y(t)||^2 dr) at t and t + h.
ShiftNormGap shift_norm_preservation(const PeriodicField& Y, const MalliavinField& DY, int h_steps);

void write_malliavin_csv(const SobolevStats& st, const RhoSolution& rho, const std::string& file);
void write_equicontinuity_csv(const SobolevStats& st, const std::string& file);
void write_rho_csv(const RhoSolution& rho, const std::string& file);

}  // namespace rps
