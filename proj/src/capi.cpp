#include "rps_spde/rps_spde.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "rps_spde/config.hpp"
#include "rps_spde/error.hpp"
#include "rps_spde/experiments.hpp"
#include "rps_spde/spectral.hpp"

struct rps_config {
  rps::ExperimentConfig cfg;
};

struct rps_basis {
  rps::SpectralBasis basis;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
rps_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return RPS_OK;
  } catch (const rps::Error& e) {
    g_last_error = e.what();
    return static_cast<rps_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RPS_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RPS_E_INTERNAL;
  }
}

rps_status null_arg(const char* what) {
  g_last_error = std::string("InvalidArgument: ") + what + " is null";
  return RPS_E_INVALID_ARGUMENT;
}

rps_status copy_out(const std::string& s, char* buf, size_t size, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || size == 0) return RPS_OK;
  const size_t n = std::min(size - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
  if (n < s.size()) {
    g_last_error = "InvalidArgument: buffer too small";
    return RPS_E_INVALID_ARGUMENT;
  }
  return RPS_OK;
}

}  // namespace

extern "C" {

const char* rps_version(void) { return RPS_SPDE_VERSION; }

const char* rps_status_name(rps_status s) { return rps::errc_name(static_cast<rps::Errc>(s)); }

const char* rps_last_error(void) { return g_last_error.c_str(); }

rps_status rps_config_parse(const char* text, rps_config** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new rps_config{rps::parse_config(text)}; });
}

rps_status rps_config_parse_raw(const char* text, rps_config** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new rps_config{rps::parse_config_raw(text)}; });
}

rps_status rps_config_load(const char* file, rps_config** out) {
  if (!file) return null_arg("file");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new rps_config{rps::load_config(file)}; });
}

void rps_config_free(rps_config* cfg) { delete cfg; }

rps_status rps_config_set(rps_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("cfg");
  if (!key || !value) return null_arg("key/value");
  return guarded([&] { rps::set_config_value(cfg->cfg, key, value); });
}

rps_status rps_config_get(const rps_config* cfg, const char* key, char* buf, size_t size, size_t* needed) {
  if (!cfg) return null_arg("cfg");
  if (!key) return null_arg("key");
  std::string v;
  const rps_status s = guarded([&] { v = rps::get_config_value(cfg->cfg, key); });
  return s != RPS_OK ? s : copy_out(v, buf, size, needed);
}

rps_status rps_config_serialize(const rps_config* cfg, char* buf, size_t size, size_t* needed) {
  if (!cfg) return null_arg("cfg");
  std::string v;
  const rps_status s = guarded([&] { v = rps::serialize_config(cfg->cfg); });
  return s != RPS_OK ? s : copy_out(v, buf, size, needed);
}

rps_status rps_config_validate(const rps_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    const auto v = rps::validate_config(cfg->cfg);
    if (v.empty()) return;
    std::string msg;
    for (size_t i = 0; i < v.size(); ++i) msg += (i ? "; " : "") + v[i];
    rps::fail(rps::Errc::validation_error, msg);
  });
}

rps_status rps_run(const rps_config* cfg, int* exit_code) {
  if (!cfg) return null_arg("cfg");
  int code = 1;
  const rps_status s = guarded([&] { code = rps::run(cfg->cfg).exit_code; });
  if (exit_code) *exit_code = s == RPS_OK ? code : 1;
  return s;
}

rps_status rps_basis_create(double x_min, double x_max, int n_x, double c, int K_m, rps_basis** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    rps::DomainSpec d;
    d.x_min = x_min;
    d.x_max = x_max;
    d.n_x = n_x;
    d.c = c;
    *out = new rps_basis{rps::build_basis(d, K_m)};
  });
}

void rps_basis_free(rps_basis* b) { delete b; }

int rps_basis_modes(const rps_basis* b) { return b ? b->basis.K : -1; }

int rps_basis_unstable(const rps_basis* b) { return b ? b->basis.m : -1; }

rps_status rps_basis_eigenvalues(const rps_basis* b, double* mu, size_t K) {
  if (!b || !mu) return null_arg("basis/mu");
  return guarded([&] {
    if (K != static_cast<size_t>(b->basis.K)) rps::fail(rps::Errc::dimension_mismatch, "K differs from the basis");
    std::copy(b->basis.mu.begin(), b->basis.mu.end(), mu);
  });
}

rps_status rps_basis_project(const rps_basis* b, const double* grid, size_t n_x, double* coeffs, size_t K) {
  if (!b || !grid || !coeffs) return null_arg("basis/grid/coeffs");
  return guarded([&] {
    if (n_x != static_cast<size_t>(b->basis.n_x()) || K != static_cast<size_t>(b->basis.K))
      rps::fail(rps::Errc::dimension_mismatch, "sizes differ from the basis");
    rps::project_into(grid, b->basis, coeffs);
  });
}

rps_status rps_basis_reconstruct(const rps_basis* b, const double* coeffs, size_t K, double* grid, size_t n_x) {
  if (!b || !grid || !coeffs) return null_arg("basis/grid/coeffs");
  return guarded([&] {
    if (n_x != static_cast<size_t>(b->basis.n_x()) || K != static_cast<size_t>(b->basis.K))
      rps::fail(rps::Errc::dimension_mismatch, "sizes differ from the basis");
    rps::reconstruct_into(coeffs, b->basis, grid);
  });
}

}  // extern "C"
