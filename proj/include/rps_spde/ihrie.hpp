#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rps_spde/cocycle.hpp"
#include "rps_spde/drift.hpp"

namespace rps {

struct IhrieConfig {
  double tau = 1.0;
  int n_t = 256;          // nodes per period, dt = tau / n_t
  double T_win = 9.0;     // half-width of the integration window
  double fp_tol = 1e-8;
  int max_iters = 50;
  double N_trunc = 10.0;
  double Lambda = 0.0;    // <= 0: mu / 8
  bool anderson = false;
  int anderson_depth = 3;

  double dt() const { return tau / n_t; }
  bool operator==(const IhrieConfig&) const = default;
};

// Every sample trajectory lives on nodes [lo, hi] = [-(n_t + n_w), 2 n_t + n_w],
// i.e. one period padded by window + period on both sides. The path must cover it.
struct IhrieLayout {
  int n_t = 0;
  double dt = 0.0;
  std::int64_t n_w = 0;
  std::int64_t lo = 0, hi = 0;
  std::int64_t n_nodes() const { return hi - lo + 1; }
  double t_min() const { return static_cast<double>(lo) * dt; }
  double t_max() const { return static_cast<double>(hi) * dt; }
};

IhrieLayout make_layout(const IhrieConfig& cfg);

// Constraint violations; empty if the config is admissible for gap mu.
std::vector<std::string> validate(const IhrieConfig& cfg, double mu);

// e^{-mu T_win / 2}
double window_tail(const IhrieConfig& cfg, double mu);

class PeriodicField {
 public:
  IhrieConfig config;
  IhrieLayout layout;
  std::uint64_t seed = 0;
  int K = 0;
  std::vector<std::uint64_t> sample_ids;
  std::vector<std::vector<double>> traj;  // per sample, node-major n_nodes x K

  std::size_t n_samples() const { return traj.size(); }
  // Frame node j in [lo, hi]; nullptr outside
  const double* at(std::size_t sample, std::int64_t j) const;
  Field value(std::size_t sample, int t_index) const;
  // Y(t, theta_{n tau} w) = Y(t + n tau, w)
  Field shifted_value(std::size_t sample, int n_periods, int t_index) const;
};

// sup over t in [0, tau) of e^{-2 Lambda |t|} * (ensemble mean of ||f(t)||^2)
double weighted_norm(const PeriodicField& f, double Lambda);
double weighted_norm_curve(std::span<const double> mean_sq, double Lambda, double dt);

Field apply_M(const PeriodicField& Y, std::size_t sample, const IhrieConfig& cfg,
              const CocycleParams& params, const WienerGrid& path, const Drift& F, double t);

struct SolveResult {
  PeriodicField Y;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // weighted_norm(Y_{n+1} - Y_n)
  double sup_F = 0.0;
  double sup_gradF = 0.0;
  std::int64_t capped_nodes = 0;
};

SolveResult solve_fixed_point(const IhrieConfig& cfg, const CocycleParams& params,
                              std::span<const WienerGrid> ensemble, const Drift& F);

// sup_t mean ||Y(t) - M(Y)(t)||^2 over [0, tau)
double residual(const PeriodicField& Y, const IhrieConfig& cfg, const CocycleParams& params,
                std::span<const WienerGrid> ensemble, const Drift& F);

// sup_t mean ||M(Y)(t + tau, w) - M(Y)(t, theta_tau w)||^2
double check_periodicity(const PeriodicField& Y, const IhrieConfig& cfg, const CocycleParams& params,
                         std::span<const WienerGrid> ensemble, const Drift& F);

// Fixed-point certificate bound d_last / (1 - rho)^2 with rho = sqrt(d_n / d_{n-1}).
double certificate_bound(std::span<const double> history);

struct LocalizeInput {
  double N;
  const PeriodicField* Y;
};

struct LocalizeResult {
  PeriodicField Y;
  std::vector<double> chosen_N;  // NaN when no N admits the sample
  double coverage = 0.0;
  double uncovered_fraction = 0.0;
};

// Per sample choose the smallest N with C_Lambda(w) < N.
LocalizeResult localize(std::span<const LocalizeInput> family, std::span<const double> C_Lambda);

void write_solution_csv(const PeriodicField& Y, const std::string& file);

}  // namespace rps
