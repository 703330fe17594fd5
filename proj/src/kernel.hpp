#pragma once

#include <cstdint>
#include <vector>

#include "rps_spde/cocycle.hpp"
#include "rps_spde/drift.hpp"

namespace rps::detail {

// Contiguous block of grid nodes [lo, lo + n) on a (possibly shifted) path.
struct Frame {
  PathView path;
  std::int64_t lo = 0;
  std::int64_t n = 0;
  std::int64_t n_w = 0;  // window length in nodes
};

// Per-mode transfer factors E(p, i) = Phi(t_p - t_i, theta_{t_i} w) P^k for one frame.
// Stable modes run forward in p, unstable modes backward.
struct KernelPlan {
  int K = 0;
  std::int64_t n = 0;
  std::vector<double> step;   // stable E(p, p-1), unstable E(p, p+1)
  std::vector<double> outer;  // stable E(p, p-n_w-1), unstable E(p, p+n_w+1)
  std::vector<double> endw;   // stable E(p, p-n_w), unstable E(p, p+n_w)
  std::vector<std::uint8_t> capped;  // window may touch the truncation cap
  std::int64_t capped_total = 0;

  std::size_t at(int q, std::int64_t p) const { return static_cast<std::size_t>(q) * n + p; }
};

KernelPlan build_plan(const CocycleParams& prm, const Frame& fr);

// E(p, i) for arbitrary nodes, untruncated
double transfer(const CocycleParams& prm, const Frame& fr, int q, std::int64_t p, std::int64_t i);

// out[p*K + q] = sum over the window of w_i Phi^N(t_p - t_i) g[i*K + q] dt, with the
// minus sign on unstable modes. Integrand is zero outside the frame.
void kernel_apply(const CocycleParams& prm, const Frame& fr, const KernelPlan& plan, const double* g,
                  double* out, std::vector<double>& scratch);

// Same quantity by direct quadrature at a single node, for one mode.
double kernel_direct(const CocycleParams& prm, const Frame& fr, const double* g, int q, std::int64_t p);

struct DriftScratch {
  std::vector<double> u, f;
};

// fvals[p*K + q] = <F(t_p, Y(t_p)), phi_q>; time of node p is (lo + p) * dt.
void drift_values(const SpectralBasis& basis, const Drift& F, const Frame& fr, const double* Y,
                  double* fvals, DriftScratch& ds);

}  // namespace rps::detail
