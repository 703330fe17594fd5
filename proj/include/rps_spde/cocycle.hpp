#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rps_spde/noise.hpp"
#include "rps_spde/spectral.hpp"

namespace rps {

struct CocycleParams {
  SpectralBasis basis;
  NoiseSpec noise;
  double Lambda = 0.0;
  double N_trunc = 10.0;  // +inf disables the cap
  double mu_gap = 0.0;    // min{-mu_{m+1}, mu_m}
};

// Lambda <= 0 selects the default mu/8. Requires 0 < Lambda < mu/4.
CocycleParams make_params(SpectralBasis basis, NoiseSpec noise, double Lambda, double N_trunc);

// Grid-index forms; q is the 0-based mode, jt the time length, js the shift.
double log_phi_idx(const CocycleParams& p, int q, std::int64_t jt, std::int64_t js,
                   const PathView& path);
double cap_idx(const CocycleParams& p, int q, std::int64_t jt, std::int64_t js, double dt);
double phi_truncated_idx(const CocycleParams& p, int q, std::int64_t jt, std::int64_t js,
                         const PathView& path);

// Mode numbers k are 1-based below.
double phi_mode(const CocycleParams& p, int k, double t, double s, const PathView& path);
Field phi_apply(const CocycleParams& p, double t, double s, const PathView& path, const Field& u);
double phi_truncated(const CocycleParams& p, int k, double t, double s, const PathView& path);

// sign = +1 keeps modes k <= m, sign = -1 keeps k > m
Field project_pm(const Field& u, const SpectralBasis& basis, int sign);

double check_cocycle(const CocycleParams& p, double t1, double t2, double s, const PathView& path);
double check_commutation(const SpectralBasis& basis, const NoiseSpec& noise, double t, const Field& u);

struct LyapunovEstimate {
  double estimate = 0.0;
  double stderr_analytic = 0.0;  // sigma_k / sqrt(T n)
  double stderr_sample = 0.0;
  int n_samples = 0;
};

// T > 0; unstable modes (k <= m) use the backward time -T.
LyapunovEstimate estimate_lyapunov(const CocycleParams& p, int k, double T,
                                   std::span<const WienerGrid> ensemble);

struct DichotomyEntry {
  int mode;
  double t, s;
  double normalized_norm;
};

struct DichotomyReport {
  std::vector<DichotomyEntry> entries;
  std::vector<double> per_mode_sup;
  double C_Lambda = 0.0;
  double C1 = 0.0, C2 = 0.0;
  std::vector<double> t_grid, s_grid;
};

// t_grid holds magnitudes |t|; stable modes use +|t|, unstable ones -|t|.
DichotomyReport estimate_C_lambda(const CocycleParams& p, const PathView& path,
                                  std::span<const double> t_grid, std::span<const double> s_grid);

// C(w) = max(C1, C2) on the t grid for the path viewed from shift s.
double dichotomy_constant(const CocycleParams& p, const PathView& path, std::span<const double> t_grid);

struct TemperednessRow {
  double s;
  double mean_log_ratio;  // mean of log+ C(theta_s w) / |s|
};

std::vector<TemperednessRow> temperedness_diagnostic(const CocycleParams& p,
                                                     std::span<const WienerGrid> ensemble,
                                                     std::span<const double> shifts,
                                                     std::span<const double> t_grid);

struct SemigroupDeviation {
  double lhs_T = 0.0;
  double lhs_Phi = 0.0;
  double lhs_Phi_stderr = 0.0;
  double rhs_T = 0.0;
  double rhs_Phi_shape = 0.0;
};

SemigroupDeviation semigroup_deviation(const CocycleParams& p, int k, double t,
                                       std::span<const WienerGrid> ensemble);

void write_dichotomy_csv(const DichotomyReport& r, const std::string& file);
void write_dichotomy_json(const DichotomyReport& r, const CocycleParams& p, std::uint64_t seed,
                          const std::string& file);

}  // namespace rps
