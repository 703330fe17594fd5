#include "rps_spde/noise.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "parallel.hpp"
#include "rps_spde/error.hpp"

namespace rps {

namespace {

std::string strip(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (std::isspace(static_cast<unsigned char>(s[a])) || s[a] == '"')) ++a;
  while (b > a && (std::isspace(static_cast<unsigned char>(s[b - 1])) || s[b - 1] == '"')) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& s, const std::string& rule) {
  const std::string t = strip(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
    fail(Errc::invalid_argument, "bad sigma rule '" + rule + "'");
  return v;
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

NoiseSpec NoiseSpec::from_rule(const std::string& rule_in, int K) {
  if (K < 1) fail(Errc::invalid_argument, "noise needs K >= 1");
  const std::string rule = strip(rule_in);
  NoiseSpec spec;
  spec.rule = rule;
  spec.sigma.assign(K, 0.0);
  if (!rule.empty() && rule.front() == '[') {
    if (rule.back() != ']') fail(Errc::invalid_argument, "bad sigma list '" + rule + "'");
    std::stringstream ss(rule.substr(1, rule.size() - 2));
    std::string item;
    std::vector<double> vals;
    while (std::getline(ss, item, ',')) vals.push_back(parse_number(item, rule));
    if (static_cast<int>(vals.size()) != K)
      fail(Errc::dimension_mismatch, "sigma list has " + std::to_string(vals.size()) +
                                         " entries, K_m = " + std::to_string(K));
    spec.sigma = vals;
    spec.summable = true;
  } else if (auto pos = rule.find("/k"); pos != std::string::npos) {
    const double a = parse_number(rule.substr(0, pos), rule);
    double p = 1.0;
    const std::string rest = strip(rule.substr(pos + 2));
    if (!rest.empty()) {
      if (rest.front() != '^') fail(Errc::invalid_argument, "bad sigma rule '" + rule + "'");
      p = parse_number(rest.substr(1), rule);
    }
    for (int q = 0; q < K; ++q) spec.sigma[q] = std::abs(a) / std::pow(q + 1.0, p);
    spec.summable = (a == 0.0) || (2.0 * p > 1.0);
  } else {
    const double a = parse_number(rule, rule);
    for (int q = 0; q < K; ++q) spec.sigma[q] = std::abs(a);
    spec.summable = (a == 0.0);
  }
  for (double s : spec.sigma)
    if (s < 0.0 || !std::isfinite(s)) fail(Errc::invalid_argument, "sigma must be finite and >= 0");
  return spec;
}

NoiseSpec NoiseSpec::explicit_values(std::vector<double> sigma) {
  NoiseSpec spec;
  spec.sigma = std::move(sigma);
  for (double s : spec.sigma)
    if (s < 0.0 || !std::isfinite(s)) fail(Errc::invalid_argument, "sigma must be finite and >= 0");
  spec.rule = "explicit";
  spec.summable = true;
  return spec;
}

double NoiseSpec::sigma_sq_max() const {
  double m = 0.0;
  for (double s : sigma) m = std::max(m, s * s);
  return m;
}

double NoiseSpec::sigma_sq_sum() const {
  double acc = 0.0;
  for (double s : sigma) acc += s * s;
  return acc;
}

ConditionBReport check_condition_B(const NoiseSpec& spec) {
  return {spec.sigma_sq_sum(), spec.sigma_sq_max(), !spec.summable};
}

void PathView::require(std::int64_t j0, std::int64_t j1, const char* what) const {
  if (!g_) fail(Errc::out_of_extent, std::string(what) + ": empty path");
  if (j0 < j_min() || j1 > j_max())
    fail(Errc::out_of_extent, std::string(what) + ": nodes [" + std::to_string(j0) + ", " +
                                  std::to_string(j1) + "] outside [" + std::to_string(j_min()) +
                                  ", " + std::to_string(j_max()) + "]");
}

PathView PathView::shifted(std::int64_t n) const {
  if (!contains(n)) fail(Errc::out_of_extent, "shift leaves the stored extent");
  return PathView(*g_, off_ + n);
}

std::int64_t grid_index(double t, double dt, const char* what) {
  if (!(dt > 0.0)) fail(Errc::invalid_argument, "dt must be > 0");
  const double r = t / dt;
  const double j = std::nearbyint(r);
  if (std::abs(r - j) > 1e-9)
    fail(Errc::grid_misaligned, std::string(what) + " = " + std::to_string(t) +
                                    " is not a multiple of dt = " + std::to_string(dt));
  return static_cast<std::int64_t>(j);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t sample_id, std::uint64_t mode,
                         std::uint64_t direction) {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ sample_id);
  k = mix64(k ^ (mode + 0x51ed2705ULL));
  return mix64(k ^ (direction + 0x2545f491ULL));
}

double stream_normal(std::uint64_t key, std::uint64_t n) {
  const std::uint64_t h1 = mix64(key ^ mix64(2 * n));
  const std::uint64_t h2 = mix64(key ^ mix64(2 * n + 1));
  const double u1 = (static_cast<double>(h1 >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

WienerGrid generate_path(int K, double dt, std::int64_t j_min, std::int64_t j_max,
                         std::uint64_t seed, std::uint64_t sample_id) {
  if (!(dt > 0.0)) fail(Errc::invalid_argument, "dt must be > 0");
  if (j_min > 0 || j_max < 0) fail(Errc::invalid_argument, "path extent must contain t = 0");
  WienerGrid g;
  g.dt = dt;
  g.j_min = j_min;
  g.j_max = j_max;
  g.K = K;
  g.seed = seed;
  g.sample_id = sample_id;
  g.W.assign(static_cast<std::size_t>(K * g.n_nodes()), 0.0);
  const double sd = std::sqrt(dt);
  for (int q = 0; q < K; ++q) {
    const std::uint64_t kp = stream_key(seed, sample_id, static_cast<std::uint64_t>(q), 0);
    const std::uint64_t kn = stream_key(seed, sample_id, static_cast<std::uint64_t>(q), 1);
    g.at(q, 0) = 0.0;
    for (std::int64_t j = 0; j < j_max; ++j)
      g.at(q, j + 1) = g.at(q, j) + sd * stream_normal(kp, static_cast<std::uint64_t>(j));
    for (std::int64_t j = 0; j < -j_min; ++j)
      g.at(q, -j - 1) = g.at(q, -j) - sd * stream_normal(kn, static_cast<std::uint64_t>(j));
  }
  return g;
}

std::vector<WienerGrid> sample_ensemble(const NoiseSpec& spec, double dt, double t_min,
                                        double t_max, int n_samples, std::uint64_t seed,
                                        std::uint64_t first_sample_id) {
  if (n_samples < 0) fail(Errc::invalid_argument, "n_samples must be >= 0");
  const std::int64_t j0 = grid_index(t_min, dt, "t_min");
  const std::int64_t j1 = grid_index(t_max, dt, "t_max");
  std::vector<WienerGrid> out(static_cast<std::size_t>(n_samples));
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
    out[i] = generate_path(spec.K(), dt, j0, j1, seed, first_sample_id + i);
  });
  return out;
}

PathView shift(const WienerGrid& path, double s) {
  return PathView(path).shifted(grid_index(s, path.dt, "shift"));
}

PathView shift(const PathView& path, double s) {
  return path.shifted(grid_index(s, path.dt(), "shift"));
}

double tilde_norm(const NoiseSpec& spec, const PathView& path, double t) {
  const std::int64_t j = grid_index(t, path.dt(), "t");
  path.require(j, j, "tilde_norm");
  double acc = 0.0;
  const int K = std::min(spec.K(), path.K());
  for (int q = 0; q < K; ++q) {
    const double v = spec.sigma[q] * path.value(q, j);
    acc += v * v;
  }
  return std::sqrt(acc);
}

void perturb_increment(WienerGrid& path, int q, std::int64_t r, double h) {
  if (r < path.j_min || r + 1 > path.j_max) fail(Errc::out_of_extent, "perturbed cell outside path");
  if (r >= 0) {
    for (std::int64_t j = r + 1; j <= path.j_max; ++j) path.at(q, j) += h;
  } else {
    for (std::int64_t j = path.j_min; j <= r; ++j) path.at(q, j) -= h;
  }
}

std::string path_file_name(std::uint64_t seed, std::uint64_t sample_id, const std::string& ext) {
  return "path_" + std::to_string(seed) + "_" + std::to_string(sample_id) + "." + ext;
}

namespace {
constexpr char kMagic[8] = {'R', 'P', 'S', 'W', 'G', 'R', 'D', '1'};
}

void write_path_binary(const WienerGrid& g, const std::string& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) fail(Errc::io_error, "cannot open " + file);
  os.write(kMagic, sizeof kMagic);
  const std::int32_t K = g.K;
  os.write(reinterpret_cast<const char*>(&g.dt), sizeof g.dt);
  os.write(reinterpret_cast<const char*>(&g.j_min), sizeof g.j_min);
  os.write(reinterpret_cast<const char*>(&g.j_max), sizeof g.j_max);
  os.write(reinterpret_cast<const char*>(&K), sizeof K);
  os.write(reinterpret_cast<const char*>(&g.seed), sizeof g.seed);
  os.write(reinterpret_cast<const char*>(&g.sample_id), sizeof g.sample_id);
  os.write(reinterpret_cast<const char*>(g.W.data()),
           static_cast<std::streamsize>(g.W.size() * sizeof(double)));
  if (!os) fail(Errc::io_error, "write failed for " + file);
}

WienerGrid read_path_binary(const std::string& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) fail(Errc::io_error, "cannot open " + file);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    fail(Errc::io_error, file + " is not a path dump");
  WienerGrid g;
  std::int32_t K = 0;
  is.read(reinterpret_cast<char*>(&g.dt), sizeof g.dt);
  is.read(reinterpret_cast<char*>(&g.j_min), sizeof g.j_min);
  is.read(reinterpret_cast<char*>(&g.j_max), sizeof g.j_max);
  is.read(reinterpret_cast<char*>(&K), sizeof K);
  is.read(reinterpret_cast<char*>(&g.seed), sizeof g.seed);
  is.read(reinterpret_cast<char*>(&g.sample_id), sizeof g.sample_id);
  if (!is || K < 0 || g.j_max < g.j_min) fail(Errc::io_error, "bad header in " + file);
  g.K = K;
  g.W.resize(static_cast<std::size_t>(K * g.n_nodes()));
  is.read(reinterpret_cast<char*>(g.W.data()), static_cast<std::streamsize>(g.W.size() * sizeof(double)));
  if (!is) fail(Errc::io_error, "truncated path dump " + file);
  return g;
}

void write_path_csv(const WienerGrid& g, const std::string& file) {
  std::FILE* f = std::fopen(file.c_str(), "w");
  if (!f) fail(Errc::io_error, "cannot open " + file);
  std::fprintf(f, "dt,j_min,j_max,K_m,seed,sample_id\n");
  std::fprintf(f, "%.17g,%lld,%lld,%d,%llu,%llu\n", g.dt, static_cast<long long>(g.j_min),
               static_cast<long long>(g.j_max), g.K, static_cast<unsigned long long>(g.seed),
               static_cast<unsigned long long>(g.sample_id));
  const std::int64_t n = g.n_nodes();
  for (int q = 0; q < g.K; ++q) {
    for (std::int64_t i = 0; i < n; ++i)
      std::fprintf(f, i ? ",%.17g" : "%.17g", g.W[static_cast<std::size_t>(q * n + i)]);
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) fail(Errc::io_error, "write failed for " + file);
}

WienerGrid read_path_csv(const std::string& file) {
  std::ifstream is(file);
  if (!is) fail(Errc::io_error, "cannot open " + file);
  std::string line;
  std::getline(is, line);
  if (line != "dt,j_min,j_max,K_m,seed,sample_id") fail(Errc::io_error, "bad header in " + file);
  std::getline(is, line);
  WienerGrid g;
  long long j0 = 0, j1 = 0;
  unsigned long long seed = 0, sid = 0;
  int K = 0;
  if (std::sscanf(line.c_str(), "%lf,%lld,%lld,%d,%llu,%llu", &g.dt, &j0, &j1, &K, &seed, &sid) != 6)
    fail(Errc::io_error, "bad header values in " + file);
  g.j_min = j0;
  g.j_max = j1;
  g.K = K;
  g.seed = seed;
  g.sample_id = sid;
  const std::int64_t n = g.n_nodes();
  g.W.resize(static_cast<std::size_t>(K * n));
  for (int q = 0; q < K; ++q) {
    if (!std::getline(is, line)) fail(Errc::io_error, "missing row in " + file);
    const char* p = line.c_str();
    for (std::int64_t i = 0; i < n; ++i) {
      char* end = nullptr;
      g.W[static_cast<std::size_t>(q * n + i)] = std::strtod(p, &end);
      if (end == p) fail(Errc::io_error, "bad value in " + file);
      p = (*end == ',') ? end + 1 : end;
    }
  }
  return g;
}

}  // namespace rps
