#include "rps_spde/allen_cahn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "parallel.hpp"
#include "rps_spde/error.hpp"

namespace rps {

double smooth_step(double z) {
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / z), b = std::exp(-1.0 / (1.0 - z));
  return a / (a + b);
}

double smooth_step_deriv(double z) {
  if (z <= 0.0 || z >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / z), b = std::exp(-1.0 / (1.0 - z));
  const double da = a / (z * z), db = b / ((1.0 - z) * (1.0 - z));
  return (da * b + a * db) / ((a + b) * (a + b));
}

namespace {

class CutoffDrift final : public Drift {
 public:
  CutoffDrift(DriftPtr F, int N) : F_(std::move(F)), N_(N), lo_(std::ldexp(1.0, N)), edge_(std::sqrt(lo_ + 1.0)) {}

  void eval(double t, const double* u, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = value1(t, u[i]);
  }

  void grad(double t, const double* u, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = u[i], z = x * x - lo_;
      if (z <= 0.0) {
        out[i] = F_->deriv(t, x);
      } else if (z >= 1.0) {
        out[i] = 0.0;
      } else {
        const double c = F_->value(t, x < 0.0 ? -edge_ : edge_);
        const double p = smooth_step(z);
        out[i] = (1.0 - p) * F_->deriv(t, x) + smooth_step_deriv(z) * 2.0 * x * (c - F_->value(t, x));
      }
    }
  }

  std::string describe() const override { return "cutoff(" + F_->describe() + ", N=" + std::to_string(N_) + ")"; }

 private:
  double value1(double t, double x) const {
    const double z = x * x - lo_;
    if (z <= 0.0) return F_->value(t, x);
    const double c = F_->value(t, x < 0.0 ? -edge_ : edge_);
    if (z >= 1.0) return c;
    const double p = smooth_step(z);
    return (1.0 - p) * F_->value(t, x) + p * c;
  }

  DriftPtr F_;
  int N_;
  double lo_, edge_;
};

}  // namespace

DriftPtr cutoff(DriftPtr F, int N_cut) {
  if (!F) fail(Errc::invalid_argument, "cutoff of a null drift");
  if (N_cut < 0 || N_cut > 60) fail(Errc::invalid_argument, "N_cut outside 0..60");
  return std::make_shared<CutoffDrift>(std::move(F), N_cut);
}

CutoffBounds cutoff_bounds(const Drift& FN, int N_cut, double tau, int n_u, int n_t) {
  CutoffBounds b;
  const double umax = std::sqrt(std::ldexp(1.0, N_cut) + 1.0) + 1.0;
  for (int k = 0; k < n_t; ++k) {
    const double t = tau * k / std::max(1, n_t - 1);
    for (int i = 0; i < n_u; ++i) {
      const double u = -umax + 2.0 * umax * i / std::max(1, n_u - 1);
      b.sup_F = std::max(b.sup_F, std::abs(FN.value(t, u)));
      b.sup_gradF = std::max(b.sup_gradF, std::abs(FN.deriv(t, u)));
    }
  }
  return b;
}

DissipativityCheck check_dissipativity(const Drift& F, double M, double L, double u_min, double u_max,
                                       double t_min, double t_max, int n_u, int n_t) {
  if (!(u_max >= u_min) || !(t_max >= t_min) || n_u < 2 || n_t < 1)
    fail(Errc::invalid_argument, "bad dissipativity scan ranges");
  DissipativityCheck c;
  bool first = true;
  for (int k = 0; k < n_t; ++k) {
    const double t = n_t == 1 ? t_min : t_min + (t_max - t_min) * k / (n_t - 1);
    for (int i = 0; i < n_u; ++i) {
      const double u = u_min + (u_max - u_min) * i / (n_u - 1);
      const double lhs = u * F.value(t, u), rhs = -M * u * u + L;
      const double m = rhs - lhs;
      if (first || m < c.worst_margin) c.worst_margin = m;
      first = false;
      if (m < -1e-12 * (1.0 + std::abs(lhs) + std::abs(rhs))) c.ok = false;
    }
  }
  return c;
}

AllenCahnResult run_allen_cahn(const IhrieConfig& cfg, const CocycleParams& params,
                               std::span<const WienerGrid> ensemble, const AllenCahnOptions& opt) {
  if (opt.N_cut.empty()) fail(Errc::invalid_argument, "N_cut list is empty");
  AllenCahnResult r;
  r.N_cut = opt.N_cut;
  std::sort(r.N_cut.begin(), r.N_cut.end());
  r.sigma_sq = params.noise.sigma_sq_max();
  r.K_rate = 2.0 * opt.M_diss - r.sigma_sq;
  if (!(r.K_rate > 0.0)) fail(Errc::validation_error, "dissipativity needs M > sigma^2 / 2");
  r.bound = 2.0 * opt.L_diss / r.K_rate;

  const DriftPtr F = make_allen_cahn_drift(opt.forcing);
  for (int N : r.N_cut) {
    const DriftPtr FN = cutoff(F, N);
    r.solves.push_back(solve_fixed_point(cfg, params, ensemble, *FN));
    r.converged = r.converged && r.solves.back().converged;
  }

  const SpectralBasis& b = params.basis;
  const int K = b.K, nx = b.n_x();
  const std::size_t S = ensemble.size();
  const IhrieLayout& L = r.solves.front().Y.layout;
  const int nt = L.n_t;

  auto mean_curve = [&](auto&& per_sample_t) {
    std::vector<double> curve(static_cast<std::size_t>(nt)), col(S);
    for (int t = 0; t < nt; ++t) {
      for (std::size_t s = 0; s < S; ++s) col[s] = per_sample_t(s, t);
      curve[t] = S ? pairwise_sum(col.data(), S) / static_cast<double>(S) : 0.0;
    }
    return curve;
  };

  for (const auto& sr : r.solves) {
    auto c = mean_curve([&](std::size_t s, int t) {
      const double* y = sr.Y.at(s, t);
      double a = 0.0;
      for (int q = 0; q < K; ++q) a += y[q] * y[q];
      return a;
    });
    r.sup_mean_sq.push_back(*std::max_element(c.begin(), c.end()));
    r.mean_sq.push_back(std::move(c));
  }

  // per (sample, x): smallest N_cut whose solution keeps |Y|^2 below 2^N over the stored range
  r.localized.assign(S, std::vector<double>(static_cast<std::size_t>(nt) * nx, 0.0));
  std::vector<std::size_t> covered(S, 0);
  parallel_for(S, [&](std::size_t s) {
    std::vector<std::vector<double>> grid(r.solves.size());
    std::vector<double> u(nx);
    for (std::size_t k = 0; k < r.solves.size(); ++k) {
      grid[k].assign(static_cast<std::size_t>(L.n_nodes()) * nx, 0.0);
      for (std::int64_t j = L.lo; j <= L.hi; ++j)
        reconstruct_into(r.solves[k].Y.at(s, j), b, grid[k].data() + (j - L.lo) * nx);
    }
    for (int x = 1; x < nx - 1; ++x) {
      int pick = -1;
      for (std::size_t k = 0; k < r.solves.size() && pick < 0; ++k) {
        const double lim = std::ldexp(1.0, r.N_cut[k]);
        double sup = 0.0;
        for (std::int64_t p = 0; p < L.n_nodes(); ++p) sup = std::max(sup, grid[k][p * nx + x] * grid[k][p * nx + x]);
        if (sup < lim) pick = static_cast<int>(k);
      }
      if (pick < 0) continue;
      ++covered[s];
      for (int t = 0; t < nt; ++t) r.localized[s][static_cast<std::size_t>(t) * nx + x] = grid[pick][(t - L.lo) * nx + x];
    }
  });
  std::size_t cov = 0;
  for (auto c : covered) cov += c;
  r.coverage = S ? static_cast<double>(cov) / static_cast<double>(S * (nx - 2)) : 1.0;

  r.localized_mean_sq = mean_curve([&](std::size_t s, int t) {
    const double v = grid_l2_norm(std::span<const double>(r.localized[s].data() + static_cast<std::size_t>(t) * nx, nx), b);
    return v * v;
  });

  // pointwise tail over interior nodes, uniform weight on (t, x)
  const double cells = static_cast<double>(nt) * (nx - 2);
  std::vector<double> msq(S);
  for (std::size_t s = 0; s < S; ++s) {
    double a = 0.0;
    for (int t = 0; t < nt; ++t)
      for (int x = 1; x < nx - 1; ++x) {
        const double v = r.localized[s][static_cast<std::size_t>(t) * nx + x];
        a += v * v;
      }
    msq[s] = a / cells;
  }
  r.mean_pointwise_sq = S ? pairwise_sum(msq.data(), S) / static_cast<double>(S) : 0.0;
  for (int n : opt.tail_n) {
    const double thr = std::ldexp(1.0, n);
    std::vector<double> f(S);
    for (std::size_t s = 0; s < S; ++s) {
      std::size_t c = 0;
      for (int t = 0; t < nt; ++t)
        for (int x = 1; x < nx - 1; ++x) {
          const double v = r.localized[s][static_cast<std::size_t>(t) * nx + x];
          if (v * v > thr) ++c;
        }
      f[s] = static_cast<double>(c) / cells;
    }
    TailRow row;
    row.n = n;
    row.fraction = S ? pairwise_sum(f.data(), S) / static_cast<double>(S) : 0.0;
    double v = 0.0;
    for (double x : f) v += (x - row.fraction) * (x - row.fraction);
    row.stderr_ = S > 1 ? std::sqrt(v / (static_cast<double>(S) - 1.0) / static_cast<double>(S)) : 0.0;
    row.markov_bound = r.mean_pointwise_sq / thr;
    r.tail.push_back(row);
  }

  const double tol = opt.stabilization_tol > 0.0 ? opt.stabilization_tol : 10.0 * cfg.fp_tol;
  for (std::size_t k = 0; k + 1 < r.solves.size(); ++k) {
    auto c = mean_curve([&](std::size_t s, int t) {
      const double *a = r.solves[k].Y.at(s, t), *bb = r.solves[k + 1].Y.at(s, t);
      double d = 0.0;
      for (int q = 0; q < K; ++q) d += (a[q] - bb[q]) * (a[q] - bb[q]);
      return d;
    });
    r.consecutive_gap.push_back(*std::max_element(c.begin(), c.end()));
  }
  for (std::size_t k = 0; k < r.solves.size(); ++k) {
    bool ok = true;
    for (std::size_t i = k; i < r.consecutive_gap.size(); ++i) ok = ok && r.consecutive_gap[i] <= tol;
    if (ok && k + 1 < r.solves.size()) {
      r.stabilized_N = r.N_cut[k];
      break;
    }
  }
  return r;
}

void write_l2_table_csv(const AllenCahnResult& r, const std::string& file) {
  std::FILE* f = std::fopen(file.c_str(), "w");
  if (!f) fail(Errc::io_error, "cannot open " + file);
  std::fprintf(f, "N_cut,t_index,mean_sq_norm,bound_2L_over_K\n");
  for (std::size_t k = 0; k < r.N_cut.size(); ++k)
    for (std::size_t t = 0; t < r.mean_sq[k].size(); ++t)
      std::fprintf(f, "%d,%zu,%.17g,%.17g\n", r.N_cut[k], t, r.mean_sq[k][t], r.bound);
  if (std::fclose(f) != 0) fail(Errc::io_error, "write failed for " + file);
}

void write_tail_csv(const AllenCahnResult& r, const std::string& file) {
  std::FILE* f = std::fopen(file.c_str(), "w");
  if (!f) fail(Errc::io_error, "cannot open " + file);
  std::fprintf(f, "n,fraction\n");
  for (const auto& row : r.tail) std::fprintf(f, "%d,%.17g\n", row.n, row.fraction);
  if (std::fclose(f) != 0) fail(Errc::io_error, "write failed for " + file);
}

}  // namespace rps
