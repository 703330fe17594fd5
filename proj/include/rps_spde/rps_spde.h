/* C interface to the rps-spde library. All handles are opaque; every call
   returns an rps_status and leaves a message in rps_last_error() on failure. */
#ifndef RPS_SPDE_H
#define RPS_SPDE_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(RPS_SPDE_BUILDING)
#    define RPS_SPDE_API __declspec(dllexport)
#  else
#    define RPS_SPDE_API __declspec(dllimport)
#  endif
#else
#  define RPS_SPDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rps_status {
  RPS_OK = 0,
  RPS_E_ZERO_EIGENVALUE = 1,
  RPS_E_GRID_TOO_COARSE = 2,
  RPS_E_DIMENSION_MISMATCH = 3,
  RPS_E_NEGATIVE_TIME = 4,
  RPS_E_NON_FINITE_DRIFT = 5,
  RPS_E_GRID_MISALIGNED = 6,
  RPS_E_OUT_OF_EXTENT = 7,
  RPS_E_WRONG_TIME_SIGN = 8,
  RPS_E_WINDOW_EXCEEDS_EXTENT = 9,
  RPS_E_NO_CONVERGENCE = 10,
  RPS_E_DIVERGENT_SERIES = 11,
  RPS_E_SINGULAR_SYSTEM = 12,
  RPS_E_PARSE = 13,
  RPS_E_VALIDATION = 14,
  RPS_E_INVALID_ARGUMENT = 15,
  RPS_E_IO = 16,
  RPS_E_INTERNAL = 17
} rps_status;

typedef struct rps_config rps_config;
typedef struct rps_basis rps_basis;

RPS_SPDE_API const char* rps_version(void);
RPS_SPDE_API const char* rps_status_name(rps_status s);
/* Message of the last failed call on this thread, "" if none. */
RPS_SPDE_API const char* rps_last_error(void);

RPS_SPDE_API rps_status rps_config_parse(const char* text, rps_config** out);
RPS_SPDE_API rps_status rps_config_load(const char* file, rps_config** out);
/* Unvalidated parse; use rps_config_validate after edits. */
RPS_SPDE_API rps_status rps_config_parse_raw(const char* text, rps_config** out);
RPS_SPDE_API void rps_config_free(rps_config* cfg);
/* value uses the file syntax, e.g. "42", "\"0.25/k\"", "[4, 6, 8]" */
RPS_SPDE_API rps_status rps_config_set(rps_config* cfg, const char* key, const char* value);
/* Copies the value text into buf (NUL terminated); *needed gets the full length + 1. */
RPS_SPDE_API rps_status rps_config_get(const rps_config* cfg, const char* key, char* buf, size_t size, size_t* needed);
RPS_SPDE_API rps_status rps_config_serialize(const rps_config* cfg, char* buf, size_t size, size_t* needed);
RPS_SPDE_API rps_status rps_config_validate(const rps_config* cfg);

/* Runs the configured experiment. exit_code receives 0 (success) or 2 (no convergence). */
RPS_SPDE_API rps_status rps_run(const rps_config* cfg, int* exit_code);

RPS_SPDE_API rps_status rps_basis_create(double x_min, double x_max, int n_x, double c, int K_m, rps_basis** out);
RPS_SPDE_API void rps_basis_free(rps_basis* b);
RPS_SPDE_API int rps_basis_modes(const rps_basis* b);
RPS_SPDE_API int rps_basis_unstable(const rps_basis* b);
RPS_SPDE_API rps_status rps_basis_eigenvalues(const rps_basis* b, double* mu, size_t K);
RPS_SPDE_API rps_status rps_basis_project(const rps_basis* b, const double* grid, size_t n_x, double* coeffs, size_t K);
RPS_SPDE_API rps_status rps_basis_reconstruct(const rps_basis* b, const double* coeffs, size_t K, double* grid,
                                              size_t n_x);

#ifdef __cplusplus
}
#endif

#endif
