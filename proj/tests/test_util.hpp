#pragma once

#include "rps_spde/cocycle.hpp"
#include "rps_spde/error.hpp"

namespace rps::test {

template <class Fn>
Errc code_of(Fn&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ok;
}

// c = 15 on (0, 1): one unstable mode
inline CocycleParams flagship_params(int K = 8, int n_x = 64, const char* rule = "0.25/k", double N = 10.0) {
  return make_params(build_basis(DomainSpec{0.0, 1.0, n_x, 15.0}, K), NoiseSpec::from_rule(rule, K), 0.0, N);
}

}  // namespace rps::test
