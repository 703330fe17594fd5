#include "rps_spde/drift.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace rps {

double Drift::value(double t, double u) const {
  double out = 0.0;
  eval(t, &u, &out, 1);
  return out;
}

double Drift::deriv(double t, double u) const {
  double out = 0.0;
  grad(t, &u, &out, 1);
  return out;
}

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

class ZeroDrift final : public Drift {
 public:
  void eval(double, const double*, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  }
  void grad(double, const double*, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  }
  std::string describe() const override { return "zero"; }
};

class ConstantDrift final : public Drift {
 public:
  explicit ConstantDrift(double a) : a_(a) {}
  void eval(double, const double*, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = a_;
  }
  void grad(double, const double*, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  }
  std::string describe() const override { return "constant(" + fmt_num(a_) + ")"; }

 private:
  double a_;
};

class SineDrift final : public Drift {
 public:
  SineDrift(double a, double tau) : a_(a), w_(2.0 * std::numbers::pi / tau) {}
  void eval(double t, const double*, double* out, std::size_t n) const override {
    const double v = a_ * std::sin(w_ * t);
    for (std::size_t i = 0; i < n; ++i) out[i] = v;
  }
  void grad(double, const double*, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  }
  std::string describe() const override { return "sine(" + fmt_num(a_) + ")"; }

 private:
  double a_, w_;
};

class TanhSineDrift final : public Drift {
 public:
  TanhSineDrift(double a, double tau) : a_(a), w_(2.0 * std::numbers::pi / tau) {}
  void eval(double t, const double* u, double* out, std::size_t n) const override {
    const double f = a_ * std::sin(w_ * t);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(u[i]) + f;
  }
  void grad(double, const double* u, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) {
      const double th = std::tanh(u[i]);
      out[i] = 1.0 - th * th;
    }
  }
  std::string describe() const override { return "tanh_sine(" + fmt_num(a_) + ")"; }

 private:
  double a_, w_;
};

class AllenCahnDrift final : public Drift {
 public:
  explicit AllenCahnDrift(double a) : a_(a) {}
  void eval(double t, const double* u, double* out, std::size_t n) const override {
    const double f = a_ * std::sin(t);
    for (std::size_t i = 0; i < n; ++i) out[i] = u[i] - u[i] * u[i] * u[i] + f;
  }
  void grad(double, const double* u, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 - 3.0 * u[i] * u[i];
  }
  std::string describe() const override { return "allen_cahn(" + fmt_num(a_) + ")"; }

 private:
  double a_;
};

class LinearDrift final : public Drift {
 public:
  explicit LinearDrift(double b) : b_(b) {}
  void eval(double, const double* u, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = b_ * u[i];
  }
  void grad(double, const double*, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = b_;
  }
  std::string describe() const override { return "linear(" + fmt_num(b_) + ")"; }

 private:
  double b_;
};

class FunctionDrift final : public Drift {
 public:
  FunctionDrift(std::function<double(double, double)> f, std::function<double(double, double)> df,
                std::string name)
      : f_(std::move(f)), df_(std::move(df)), name_(std::move(name)) {}
  void eval(double t, const double* u, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = f_(t, u[i]);
  }
  void grad(double t, const double* u, double* out, std::size_t n) const override {
    for (std::size_t i = 0; i < n; ++i) out[i] = df_ ? df_(t, u[i]) : 0.0;
  }
  std::string describe() const override { return name_; }

 private:
  std::function<double(double, double)> f_, df_;
  std::string name_;
};

}  // namespace

DriftPtr make_zero_drift() { return std::make_shared<ZeroDrift>(); }
DriftPtr make_constant_drift(double a) { return std::make_shared<ConstantDrift>(a); }
DriftPtr make_sine_drift(double a, double tau) { return std::make_shared<SineDrift>(a, tau); }
DriftPtr make_tanh_sine_drift(double a, double tau) {
  return std::make_shared<TanhSineDrift>(a, tau);
}
DriftPtr make_allen_cahn_drift(double a) { return std::make_shared<AllenCahnDrift>(a); }
DriftPtr make_linear_drift(double b) { return std::make_shared<LinearDrift>(b); }
DriftPtr make_function_drift(std::function<double(double, double)> f,
                             std::function<double(double, double)> df, std::string name) {
  return std::make_shared<FunctionDrift>(std::move(f), std::move(df), std::move(name));
}

}  // namespace rps
