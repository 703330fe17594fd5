#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rps {

struct NoiseSpec {
  std::vector<double> sigma;  // sigma[q] for mode q + 1
  std::string rule;           // generating rule, e.g. "0.25/k"
  bool summable = true;       // declared tail of the rule is square-summable

  // "a", "a/k", "a/k^p" or "[s1, s2, ...]". A constant nonzero rule is
  // flagged non-summable even though it is truncated at K.
  static NoiseSpec from_rule(const std::string& rule, int K);
  static NoiseSpec explicit_values(std::vector<double> sigma);

  int K() const { return static_cast<int>(sigma.size()); }
  double sigma_sq_max() const;
  double sigma_sq_sum() const;
};

struct ConditionBReport {
  double partial_sum = 0.0;   // sum_k sigma_k^2
  double max_sigma_sq = 0.0;  // max_k sigma_k^2
  bool non_summable = false;
};

ConditionBReport check_condition_B(const NoiseSpec& spec);

// Two-sided per-mode Brownian path on t_j = j*dt, j in [j_min, j_max].
struct WienerGrid {
  double dt = 0.0;
  std::int64_t j_min = 0, j_max = 0;
  int K = 0;
  std::uint64_t seed = 0;
  std::uint64_t sample_id = 0;
  std::vector<double> W;  // W[q * n_nodes() + (j - j_min)]

  std::int64_t n_nodes() const { return j_max - j_min + 1; }
  double at(int q, std::int64_t j) const { return W[static_cast<std::size_t>(q * n_nodes() + (j - j_min))]; }
  double& at(int q, std::int64_t j) { return W[static_cast<std::size_t>(q * n_nodes() + (j - j_min))]; }
  double t_min() const { return static_cast<double>(j_min) * dt; }
  double t_max() const { return static_cast<double>(j_max) * dt; }
};

// Shifted view theta_s W with s = offset * dt. Frame node j refers to base node j + offset.
class PathView {
 public:
  PathView() = default;
  explicit PathView(const WienerGrid& g, std::int64_t offset = 0) : g_(&g), off_(offset) {}

  const WienerGrid& grid() const { return *g_; }
  double dt() const { return g_->dt; }
  int K() const { return g_->K; }
  std::int64_t offset() const { return off_; }
  std::int64_t j_min() const { return g_->j_min - off_; }
  std::int64_t j_max() const { return g_->j_max - off_; }
  bool contains(std::int64_t j) const { return j >= j_min() && j <= j_max(); }
  void require(std::int64_t j0, std::int64_t j1, const char* what) const;

  // (theta_s W)(t_j) = W(t_j + s) - W(s)
  double value(int q, std::int64_t j) const { return g_->at(q, j + off_) - g_->at(q, off_); }
  // W(t_j1 + s) - W(t_j0 + s), taken directly from base values
  double incr(int q, std::int64_t j0, std::int64_t j1) const {
    return g_->at(q, j1 + off_) - g_->at(q, j0 + off_);
  }
  PathView shifted(std::int64_t n) const;

 private:
  const WienerGrid* g_ = nullptr;
  std::int64_t off_ = 0;
};

// Nearest grid index of t; GridMisaligned unless |t/dt - j| <= 1e-9.
std::int64_t grid_index(double t, double dt, const char* what);

// Counter-based normal deviate for stream (seed, sample, mode, direction) at position n.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t sample_id, std::uint64_t mode,
                         std::uint64_t direction);
double stream_normal(std::uint64_t key, std::uint64_t n);

WienerGrid generate_path(int K, double dt, std::int64_t j_min, std::int64_t j_max,
                         std::uint64_t seed, std::uint64_t sample_id);

std::vector<WienerGrid> sample_ensemble(const NoiseSpec& spec, double dt, double t_min,
                                        double t_max, int n_samples, std::uint64_t seed,
                                        std::uint64_t first_sample_id = 0);

PathView shift(const WienerGrid& path, double s);
PathView shift(const PathView& path, double s);

// ||W~_t||_H = sqrt(sum_k sigma_k^2 (W^k_t)^2)
double tilde_norm(const NoiseSpec& spec, const PathView& path, double t);

// Adds h to the increment of mode q on the cell [t_r, t_r + dt), keeping W(0) = 0.
void perturb_increment(WienerGrid& path, int q, std::int64_t r, double h);

std::string path_file_name(std::uint64_t seed, std::uint64_t sample_id, const std::string& ext);
void write_path_binary(const WienerGrid& path, const std::string& file);
WienerGrid read_path_binary(const std::string& file);
void write_path_csv(const WienerGrid& path, const std::string& file);
WienerGrid read_path_csv(const std::string& file);

}  // namespace rps
