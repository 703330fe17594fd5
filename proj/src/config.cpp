#include "rps_spde/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "rps_spde/error.hpp"
#include "rps_spde/noise.hpp"
#include "rps_spde/semiflow.hpp"

namespace rps {

namespace {

enum class Kind { real, integer, uinteger, boolean, string, real_list, int_list };

struct Key {
  std::string name;
  Kind kind;
  bool required;
  std::function<void*(ExperimentConfig&)> ref;
};

#define RPS_KEY(name, kind, req, member) \
  Key { name, kind, req, [](ExperimentConfig& c) -> void* { return &c.member; } }

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = {
      RPS_KEY("experiment", Kind::string, true, experiment),
      RPS_KEY("seed", Kind::uinteger, true, seed),
      RPS_KEY("n_samples", Kind::integer, false, n_samples),
      RPS_KEY("output_dir", Kind::string, false, output_dir),
      RPS_KEY("domain.x_min", Kind::real, false, domain.x_min),
      RPS_KEY("domain.x_max", Kind::real, false, domain.x_max),
      RPS_KEY("domain.n_x", Kind::integer, false, domain.n_x),
      RPS_KEY("domain.c", Kind::real, true, domain.c),
      RPS_KEY("basis.K_m", Kind::integer, true, K_m),
      RPS_KEY("noise.sigma_rule", Kind::string, true, sigma_rule),
      RPS_KEY("cocycle.Lambda", Kind::real, false, Lambda),
      RPS_KEY("cocycle.N_trunc", Kind::real, false, N_trunc),
      RPS_KEY("drift.kind", Kind::string, false, drift),
      RPS_KEY("drift.a", Kind::real, false, drift_a),
      RPS_KEY("ihrie.tau", Kind::real, false, ihrie.tau),
      RPS_KEY("ihrie.n_t", Kind::integer, false, ihrie.n_t),
      RPS_KEY("ihrie.T_win", Kind::real, false, ihrie.T_win),
      RPS_KEY("ihrie.fp_tol", Kind::real, false, ihrie.fp_tol),
      RPS_KEY("ihrie.max_iters", Kind::integer, false, ihrie.max_iters),
      RPS_KEY("ihrie.anderson", Kind::boolean, false, ihrie.anderson),
      RPS_KEY("ihrie.anderson_depth", Kind::integer, false, ihrie.anderson_depth),
      RPS_KEY("flow.dt_flow", Kind::real, false, flow.dt_flow),
      RPS_KEY("flow.scheme", Kind::string, false, flow.scheme),
      RPS_KEY("flow.t_stride", Kind::integer, false, flow.t_stride),
      RPS_KEY("flow.max_samples", Kind::integer, false, flow.max_samples),
      RPS_KEY("flow.refine", Kind::int_list, false, flow.refine),
      RPS_KEY("lyapunov.T", Kind::real, false, lyapunov.T),
      RPS_KEY("lyapunov.dt", Kind::real, false, lyapunov.dt),
      RPS_KEY("dichotomy.dt", Kind::real, false, dichotomy.dt),
      RPS_KEY("dichotomy.t_max", Kind::real, false, dichotomy.t_max),
      RPS_KEY("dichotomy.n_grid", Kind::integer, false, dichotomy.n_grid),
      RPS_KEY("dichotomy.s_values", Kind::real_list, false, dichotomy.s_values),
      RPS_KEY("malliavin.r_min", Kind::real, false, malliavin.r_min),
      RPS_KEY("malliavin.r_max", Kind::real, false, malliavin.r_max),
      RPS_KEY("malliavin.r_stride", Kind::integer, false, malliavin.r_stride),
      RPS_KEY("malliavin.delta_steps", Kind::int_list, false, malliavin.delta_steps),
      RPS_KEY("malliavin.shift_periods", Kind::integer, false, malliavin.shift_periods),
      RPS_KEY("allen_cahn.N_cut", Kind::int_list, false, allen_cahn.N_cut),
      RPS_KEY("allen_cahn.M_diss", Kind::real, false, allen_cahn.M_diss),
      RPS_KEY("allen_cahn.L_diss", Kind::real, false, allen_cahn.L_diss),
      RPS_KEY("allen_cahn.forcing", Kind::real, false, allen_cahn.forcing),
  };
  return keys;
}

#undef RPS_KEY

const Key* find_key(const std::string& name) {
  for (const auto& k : registry())
    if (k.name == name) return &k;
  return nullptr;
}

[[noreturn]] void parse_fail(int line, int col, const std::string& msg) {
  fail(Errc::parse_error, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
}

struct Value {
  enum Type { number, string, boolean, list } type = number;
  std::string text;  // raw token for numbers, content for strings
  double num = 0.0;
  bool b = false;
  std::vector<Value> items;
  int col = 0;
};

class Lexer {
 public:
  Lexer(std::string s, int line, int col0) : s_(std::move(s)), line_(line), col0_(col0) {}

  Value value() {
    skip();
    if (i_ >= s_.size()) parse_fail(line_, col(), "missing value");
    const char c = s_[i_];
    Value v;
    v.col = col();
    if (c == '"') {
      v.type = Value::string;
      ++i_;
      while (true) {
        if (i_ >= s_.size()) parse_fail(line_, v.col, "unterminated string");
        char ch = s_[i_++];
        if (ch == '"') break;
        if (ch == '\\') {
          if (i_ >= s_.size()) parse_fail(line_, col(), "dangling escape");
          ch = s_[i_++];
          if (ch == 'n') ch = '\n';
          else if (ch == 't') ch = '\t';
          else if (ch != '"' && ch != '\\') parse_fail(line_, col() - 1, std::string("unknown escape \\") + ch);
        }
        v.text.push_back(ch);
      }
      return v;
    }
    if (c == '[') {
      v.type = Value::list;
      ++i_;
      skip();
      if (i_ < s_.size() && s_[i_] == ']') {
        ++i_;
        return v;
      }
      while (true) {
        Value item = value();
        if (item.type == Value::list) parse_fail(line_, item.col, "nested lists are not supported");
        v.items.push_back(std::move(item));
        skip();
        if (i_ >= s_.size()) parse_fail(line_, col(), "unterminated list");
        if (s_[i_] == ',') {
          ++i_;
          continue;
        }
        if (s_[i_] == ']') {
          ++i_;
          return v;
        }
        parse_fail(line_, col(), "expected ',' or ']'");
      }
    }
    std::size_t j = i_;
    while (j < s_.size() && s_[j] != ',' && s_[j] != ']' && !std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
    v.text = s_.substr(i_, j - i_);
    i_ = j;
    if (v.text == "true" || v.text == "false") {
      v.type = Value::boolean;
      v.b = v.text == "true";
      return v;
    }
    v.type = Value::number;
    if (v.text == "inf" || v.text == "+inf") {
      v.num = std::numeric_limits<double>::infinity();
      return v;
    }
    if (v.text == "-inf") {
      v.num = -std::numeric_limits<double>::infinity();
      return v;
    }
    const char* b = v.text.data();
    const char* e = b + v.text.size();
    if (*b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v.num);
    if (ec != std::errc() || p != e || !std::isfinite(v.num))
      parse_fail(line_, v.col, "cannot read '" + v.text + "' as a value");
    return v;
  }

  void expect_end() {
    skip();
    if (i_ < s_.size()) parse_fail(line_, col(), "unexpected trailing text");
  }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  int col() const { return col0_ + static_cast<int>(i_); }

  std::string s_;
  int line_, col0_;
  std::size_t i_ = 0;
};

long long to_integer(const Value& v, int line) {
  if (v.type != Value::number) parse_fail(line, v.col, "expected an integer");
  long long x = 0;
  const char* b = v.text.data();
  const char* e = b + v.text.size();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e) parse_fail(line, v.col, "expected an integer, got '" + v.text + "'");
  return x;
}

void assign(ExperimentConfig& cfg, const Key& k, const Value& v, int line) {
  void* ref = k.ref(cfg);
  switch (k.kind) {
    case Kind::real:
      if (v.type != Value::number) parse_fail(line, v.col, k.name + " expects a number");
      *static_cast<double*>(ref) = v.num;
      return;
    case Kind::integer: {
      const long long x = to_integer(v, line);
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        parse_fail(line, v.col, k.name + " is out of range");
      *static_cast<int*>(ref) = static_cast<int>(x);
      return;
    }
    case Kind::uinteger: {
      if (v.type != Value::number) parse_fail(line, v.col, k.name + " expects an unsigned integer");
      std::uint64_t x = 0;
      auto [p, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
      if (ec != std::errc() || p != v.text.data() + v.text.size())
        parse_fail(line, v.col, k.name + " expects an unsigned integer, got '" + v.text + "'");
      *static_cast<std::uint64_t*>(ref) = x;
      return;
    }
    case Kind::boolean:
      if (v.type != Value::boolean) parse_fail(line, v.col, k.name + " expects true or false");
      *static_cast<bool*>(ref) = v.b;
      return;
    case Kind::string:
      if (v.type != Value::string) parse_fail(line, v.col, k.name + " expects a quoted string");
      *static_cast<std::string*>(ref) = v.text;
      return;
    case Kind::real_list: {
      if (v.type != Value::list) parse_fail(line, v.col, k.name + " expects a list");
      std::vector<double> out;
      for (const auto& it : v.items) {
        if (it.type != Value::number) parse_fail(line, it.col, k.name + " expects numbers");
        out.push_back(it.num);
      }
      *static_cast<std::vector<double>*>(ref) = std::move(out);
      return;
    }
    case Kind::int_list: {
      if (v.type != Value::list) parse_fail(line, v.col, k.name + " expects a list");
      std::vector<int> out;
      for (const auto& it : v.items) out.push_back(static_cast<int>(to_integer(it, line)));
      *static_cast<std::vector<int>*>(ref) = std::move(out);
      return;
    }
  }
}

std::string fmt_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  std::string s(buf, p);
  // keep a decimal marker so the value reads back as a real
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string o = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') o.push_back('\\');
    if (c == '\n') {
      o += "\\n";
      continue;
    }
    if (c == '\t') {
      o += "\\t";
      continue;
    }
    o.push_back(c);
  }
  return o + "\"";
}

std::string format_value(ExperimentConfig& cfg, const Key& k) {
  void* ref = k.ref(cfg);
  switch (k.kind) {
    case Kind::real: return fmt_real(*static_cast<double*>(ref));
    case Kind::integer: return std::to_string(*static_cast<int*>(ref));
    case Kind::uinteger: return std::to_string(*static_cast<std::uint64_t*>(ref));
    case Kind::boolean: return *static_cast<bool*>(ref) ? "true" : "false";
    case Kind::string: return quote(*static_cast<std::string*>(ref));
    case Kind::real_list: {
      std::string s = "[";
      const auto& v = *static_cast<std::vector<double>*>(ref);
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_real(v[i]);
      return s + "]";
    }
    case Kind::int_list: {
      std::string s = "[";
      const auto& v = *static_cast<std::vector<int>*>(ref);
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
      return s + "]";
    }
  }
  return {};
}

bool on_grid(double x, double dt) {
  const double r = x / dt;
  return std::abs(r - std::nearbyint(r)) <= 1e-9;
}

std::string num(double x) { return fmt_real(x); }

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"basis-check", "lyapunov", "dichotomy", "ihrie-solve",
                                                 "rps-verify",  "malliavin", "rho",      "allen-cahn"};
  return names;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> v;
    for (const auto& k : registry()) v.push_back(k.name);
    return v;
  }();
  return keys;
}

ExperimentConfig parse_config_raw(const std::string& text, std::vector<std::string>* missing) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    // strip comment outside strings
    bool in_str = false;
    std::size_t cut = raw.size();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '\\' && in_str) {
        ++i;
        continue;
      }
      if (raw[i] == '"') in_str = !in_str;
      if (raw[i] == '#' && !in_str) {
        cut = i;
        break;
      }
    }
    const std::string s = raw.substr(0, cut);
    const std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) parse_fail(line, static_cast<int>(a) + 1, "expected 'key = value'");
    std::size_t e = eq;
    while (e > a && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    const std::string key = s.substr(a, e - a);
    if (key.empty()) parse_fail(line, static_cast<int>(a) + 1, "missing key");
    for (std::size_t i = 0; i < key.size(); ++i) {
      const char c = key[i];
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
        parse_fail(line, static_cast<int>(a + i) + 1, "invalid character in key");
    }
    const Key* k = find_key(key);
    if (!k) parse_fail(line, static_cast<int>(a) + 1, "unknown key '" + key + "'");
    if (!seen.insert(key).second) parse_fail(line, static_cast<int>(a) + 1, "duplicate key '" + key + "'");
    Lexer lx(s.substr(eq + 1), line, static_cast<int>(eq) + 2);
    const Value v = lx.value();
    lx.expect_end();
    assign(cfg, *k, v, line);
  }
  if (missing) {
    missing->clear();
    for (const auto& k : registry())
      if (k.required && !seen.count(k.name)) missing->push_back(k.name);
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::string> missing;
  ExperimentConfig cfg = parse_config_raw(text, &missing);
  std::vector<std::string> v;
  for (const auto& m : missing) v.push_back("missing required key " + m);
  if (missing.empty()) {
    auto more = validate_config(cfg);
    v.insert(v.end(), more.begin(), more.end());
  }
  if (!v.empty()) {
    std::string msg;
    for (std::size_t i = 0; i < v.size(); ++i) msg += (i ? "; " : "") + v[i];
    fail(Errc::validation_error, msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) fail(Errc::io_error, "cannot open " + file);
  std::ostringstream os;
  os << is.rdbuf();
  return parse_config(os.str());
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) fail(Errc::invalid_argument, "unknown key '" + key + "'");
  Lexer lx(value, 1, 1);
  const Value v = lx.value();
  lx.expect_end();
  assign(cfg, *k, v, 1);
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
  const Key* k = find_key(key);
  if (!k) fail(Errc::invalid_argument, "unknown key '" + key + "'");
  ExperimentConfig c = cfg;
  return format_value(c, *k);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  std::string out;
  for (const auto& k : registry()) out += k.name + " = " + format_value(c, k) + "\n";
  return out;
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> v;
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    v.push_back("experiment '" + c.experiment + "' is not one of basis-check, lyapunov, dichotomy, ihrie-solve, "
                "rps-verify, malliavin, rho, allen-cahn");
  if (c.n_samples < 1) v.push_back("n_samples must be >= 1");
  if (c.output_dir.empty()) v.push_back("output_dir must not be empty");
  if (!(c.domain.x_max > c.domain.x_min)) v.push_back("domain.x_max must exceed domain.x_min");
  if (c.K_m < 1) v.push_back("basis.K_m must be >= 1");
  if (c.domain.n_x < 8 || c.domain.n_x < 4 * c.K_m) v.push_back("domain.n_x must be >= max(8, 4 K_m)");

  bool noise_ok = false;
  NoiseSpec noise;
  if (c.K_m >= 1) {
    try {
      noise = NoiseSpec::from_rule(c.sigma_rule, c.K_m);
      noise_ok = true;
    } catch (const Error& e) {
      v.push_back(std::string("noise.sigma_rule: ") + e.what());
    }
  }

  double gap = 0.0;
  int m = -1;
  if (c.K_m >= 1 && c.domain.n_x >= 8 && c.domain.n_x >= 4 * c.K_m && c.domain.x_max > c.domain.x_min) {
    try {
      const SpectralBasis b = build_basis(c.domain, c.K_m);
      gap = spectral_gap(b);
      m = b.m;
    } catch (const Error& e) {
      v.push_back(std::string("basis: ") + e.what());
    }
  }
  if (gap > 0.0 && c.Lambda > 0.0 && !(c.Lambda < gap / 4.0))
    v.push_back("cocycle.Lambda = " + num(c.Lambda) + " violates Lambda < mu/4 = " + num(gap / 4.0));
  if (!(c.N_trunc >= 0.0)) v.push_back("cocycle.N_trunc must be >= 0");
  static const std::vector<std::string> drifts = {"zero", "constant", "sine", "tanh-sine", "allen-cahn", "linear"};
  if (std::find(drifts.begin(), drifts.end(), c.drift) == drifts.end())
    v.push_back("drift.kind '" + c.drift + "' is not one of zero, constant, sine, tanh-sine, allen-cahn, linear");

  for (const auto& s : validate(c.ihrie, gap)) v.push_back(s);
  const bool grid_ok = c.ihrie.tau > 0.0 && c.ihrie.n_t >= 1;
  const double dt = grid_ok ? c.ihrie.dt() : 0.0;

  // flow settings only matter to rps-verify
  const bool flow_used = c.experiment == "rps-verify";
  try {
    parse_scheme(c.flow.scheme);
  } catch (const Error&) {
    v.push_back("flow.scheme '" + c.flow.scheme + "' is not exponential-euler or midpoint-quadrature");
  }
  if (!(c.flow.dt_flow > 0.0)) {
    v.push_back("flow.dt_flow must be > 0");
  } else if (grid_ok && flow_used) {
    if (!on_grid(c.flow.dt_flow, dt)) v.push_back("flow.dt_flow must be a multiple of dt = tau/n_t");
    if (!on_grid(c.ihrie.tau, c.flow.dt_flow)) v.push_back("flow.dt_flow must divide tau (dt_flow | tau)");
  }
  if (c.flow.t_stride < 1) v.push_back("flow.t_stride must be >= 1");
  if (c.flow.max_samples < 0) v.push_back("flow.max_samples must be >= 0");
  for (int r : c.flow.refine)
    if (r < 1 || (grid_ok && flow_used && c.ihrie.n_t % r != 0))
      v.push_back("flow.refine entry " + std::to_string(r) + " must divide ihrie.n_t");

  if (!(c.lyapunov.T > 0.0) || !(c.lyapunov.dt > 0.0) ||
      (c.lyapunov.dt > 0.0 && !on_grid(c.lyapunov.T, c.lyapunov.dt)))
    v.push_back("lyapunov.T and lyapunov.dt must be positive with dt | T");

  if (!(c.dichotomy.dt > 0.0)) {
    v.push_back("dichotomy.dt must be > 0");
  } else {
    if (!(c.dichotomy.t_max > 0.0) || !on_grid(c.dichotomy.t_max, c.dichotomy.dt))
      v.push_back("dichotomy.t_max must be a positive multiple of dichotomy.dt");
    for (double s : c.dichotomy.s_values)
      if (!on_grid(s, c.dichotomy.dt)) v.push_back("dichotomy.s_values entry " + num(s) + " is off the grid");
  }
  if (c.dichotomy.n_grid < 1) v.push_back("dichotomy.n_grid must be >= 1");

  if (!(c.malliavin.r_max > c.malliavin.r_min)) v.push_back("malliavin.r_max must exceed malliavin.r_min");
  if (c.experiment == "malliavin" && grid_ok && (!on_grid(c.malliavin.r_min, dt) || !on_grid(c.malliavin.r_max, dt)))
    v.push_back("malliavin.r_min and r_max must lie on the dt grid");
  if (c.malliavin.r_stride < 1) v.push_back("malliavin.r_stride must be >= 1");
  for (int d : c.malliavin.delta_steps)
    if (d < 1) v.push_back("malliavin.delta_steps entries must be >= 1");
  if (c.malliavin.shift_periods < 0 || c.malliavin.shift_periods > 1)
    v.push_back("malliavin.shift_periods must be 0 or 1");
  if (c.experiment == "malliavin" && grid_ok && c.ihrie.T_win > 0.0 && on_grid(c.ihrie.T_win, dt)) {
    const IhrieLayout L = make_layout(c.ihrie);
    if (c.malliavin.r_min < L.t_min() || c.malliavin.r_max > L.t_max())
      v.push_back("malliavin r range leaves the solution frame [" + num(L.t_min()) + ", " + num(L.t_max()) + "]");
  }
  if (c.experiment == "malliavin" && c.ihrie.anderson)
    v.push_back("malliavin needs ihrie.anderson = false (plain Picard co-iteration)");

  if (c.allen_cahn.N_cut.empty()) v.push_back("allen_cahn.N_cut must not be empty");
  for (int n : c.allen_cahn.N_cut)
    if (n < 0 || n > 60) v.push_back("allen_cahn.N_cut entries must lie in 0..60");
  if (noise_ok && !(c.allen_cahn.M_diss > noise.sigma_sq_max() / 2.0))
    v.push_back("allen_cahn.M_diss must exceed sigma^2/2");
  if (c.experiment == "allen-cahn" && m > 0)
    v.push_back("allen-cahn needs every mode stable (domain.c below the first eigenvalue)");
  return v;
}

}  // namespace rps
