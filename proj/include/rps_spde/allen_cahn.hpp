#pragma once

#include <span>
#include <string>
#include <vector>

#include "rps_spde/drift.hpp"
#include "rps_spde/ihrie.hpp"

namespace rps {

// F^N: equals F for u^2 < 2^N, clamped to F(t, +-sqrt(2^N + 1)) beyond, C1 blend between.
DriftPtr cutoff(DriftPtr F, int N_cut);

// exp(-1/z) based smooth step on [0, 1] and its derivative
double smooth_step(double z);
double smooth_step_deriv(double z);

struct CutoffBounds {
  double sup_F = 0.0;
  double sup_gradF = 0.0;
};

// Dense scan of |F^N| and |dF^N/du| over |u| <= sqrt(2^N + 1) + 1, t in [0, tau].
CutoffBounds cutoff_bounds(const Drift& FN, int N_cut, double tau, int n_u = 4001, int n_t = 65);

struct DissipativityCheck {
  bool ok = true;
  double worst_margin = 0.0;  // min over the grid of -M u^2 + L - u F(t, u)
};

DissipativityCheck check_dissipativity(const Drift& F, double M_diss, double L_diss, double u_min, double u_max,
                                       double t_min, double t_max, int n_u = 2001, int n_t = 201);

struct AllenCahnOptions {
  std::vector<int> N_cut{4, 6, 8};
  double M_diss = 1.5;
  double L_diss = 5.0;
  double forcing = 1.0;          // u - u^3 + forcing * sin t
  std::vector<int> tail_n{2, 3, 4, 5, 6};
  double stabilization_tol = 0.0;  // <= 0: 10 * fp_tol
};

struct TailRow {
  int n = 0;
  double fraction = 0.0;
  double stderr_ = 0.0;
  double markov_bound = 0.0;  // mean |Y|^2 / 2^n
};

struct AllenCahnResult {
  std::vector<int> N_cut;
  std::vector<SolveResult> solves;
  std::vector<std::vector<double>> mean_sq;  // per N_cut, E||Y(t)||^2 over [0, tau)
  std::vector<double> sup_mean_sq;
  double sigma_sq = 0.0;
  double K_rate = 0.0;
  double bound = 0.0;  // 2 L / K
  // localized field on grid points: per sample, n_t x n_x
  std::vector<std::vector<double>> localized;
  std::vector<double> localized_mean_sq;
  double coverage = 0.0;
  double mean_pointwise_sq = 0.0;  // mean of |Y(t, x)|^2 over samples, t, interior x
  std::vector<TailRow> tail;
  std::vector<double> consecutive_gap;  // sup_t E||Y^{N_i} - Y^{N_{i+1}}||^2
  int stabilized_N = -1;               // smallest N_cut after which the solutions agree; -1 if none
  bool converged = true;
};

AllenCahnResult run_allen_cahn(const IhrieConfig& cfg, const CocycleParams& params,
                               std::span<const WienerGrid> ensemble, const AllenCahnOptions& opt);

void write_l2_table_csv(const AllenCahnResult& r, const std::string& file);
void write_tail_csv(const AllenCahnResult& r, const std::string& file);

}  // namespace rps
