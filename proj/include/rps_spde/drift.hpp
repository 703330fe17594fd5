#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>

namespace rps {

// Scalar drift F(t, u) applied pointwise in x. Batched over grid nodes.
class Drift {
 public:
  virtual ~Drift() = default;
  virtual void eval(double t, const double* u, double* out, std::size_t n) const = 0;
  // dF/du
  virtual void grad(double t, const double* u, double* out, std::size_t n) const = 0;
  virtual std::string describe() const = 0;

  double value(double t, double u) const;
  double deriv(double t, double u) const;
};

using DriftPtr = std::shared_ptr<const Drift>;

DriftPtr make_zero_drift();
DriftPtr make_constant_drift(double a);
// a * sin(2 pi t / tau)
DriftPtr make_sine_drift(double a, double tau);
// tanh(u) + a * sin(2 pi t / tau)
DriftPtr make_tanh_sine_drift(double a, double tau);
// u - u^3 + a * sin(t)
DriftPtr make_allen_cahn_drift(double a = 1.0);
// b * u
DriftPtr make_linear_drift(double b);
DriftPtr make_function_drift(std::function<double(double, double)> f,
                             std::function<double(double, double)> df,
                             std::string name);

}  // namespace rps
