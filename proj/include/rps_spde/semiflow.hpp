#pragma once

#include <span>
#include <string>
#include <vector>

#include "rps_spde/cocycle.hpp"
#include "rps_spde/drift.hpp"
#include "rps_spde/ihrie.hpp"

namespace rps {

enum class Scheme { exponential_euler, midpoint_quadrature };

const char* scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

struct MildSolverConfig {
  double dt_flow = 1.0 / 256.0;
  Scheme scheme = Scheme::exponential_euler;
  double blowup = 1e8;          // abort when ||u|| exceeds this
  int implicit_max_iters = 100;
  double implicit_tol = 1e-14;
};

// u(t, s, psi, w) = Phi(t - s, theta_s w) psi + int_s^t Phi(t - r, theta_r w) F(r, u(r)) dr.
// exponential-euler:   D_{n+1} = Phi(h)(D_n + h F_n)
// midpoint-quadrature: D_{n+1} = Phi(h)(D_n + h/2 F_n) + h/2 F_{n+1}, solved by iteration
Field integrate_mild(const Field& psi, double s, double t, const PathView& path, const CocycleParams& params,
                     const Drift& F, const MildSolverConfig& cfg);

struct VerifyRow {
  int t_index;
  double mean_sq_error;
  double stderr_;
};

struct VerifyResult {
  double err_L2 = 0.0;        // sup_t E||u(t + tau, t, Y(t)) - Y(t + tau)||^2
  double sup_mean_sq_Y = 0.0;  // sup_t E||Y(t)||^2 over the same samples
  std::vector<VerifyRow> per_t;
};

// Starting times t_index = 0, t_stride, ...; the first max_samples samples (0 = all).
VerifyResult verify_rps(const PeriodicField& Y, const CocycleParams& params, std::span<const WienerGrid> ensemble,
                        const Drift& F, const MildSolverConfig& flow, int t_stride = 1, std::size_t max_samples = 0);

void write_verification_csv(const VerifyResult& r, const std::string& file);

}  // namespace rps
