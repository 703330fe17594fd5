#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rps_spde/ihrie.hpp"
#include "rps_spde/spectral.hpp"

namespace rps {

struct FlowSettings {
  double dt_flow = 1.0 / 256.0;
  std::string scheme = "exponential-euler";
  int t_stride = 1;
  int max_samples = 0;
  std::vector<int> refine{64, 128, 256};  // steps per period for the refinement table
  bool operator==(const FlowSettings&) const = default;
};

struct LyapunovSettings {
  double T = 50.0;
  double dt = 0.05;
  bool operator==(const LyapunovSettings&) const = default;
};

struct DichotomySettings {
  double dt = 0.01;
  double t_max = 5.0;
  int n_grid = 50;
  std::vector<double> s_values{-20.0, -10.0, -5.0, 0.0, 5.0, 10.0, 20.0};
  bool operator==(const DichotomySettings&) const = default;
};

struct MalliavinSettings {
  double r_min = -2.0;
  double r_max = 3.0;
  int r_stride = 1;
  std::vector<int> delta_steps{1, 2, 4};
  int shift_periods = 1;
  bool operator==(const MalliavinSettings&) const = default;
};

struct AllenCahnSettings {
  std::vector<int> N_cut{4, 6, 8};
  double M_diss = 1.5;
  double L_diss = 5.0;
  double forcing = 1.0;
  bool operator==(const AllenCahnSettings&) const = default;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  int n_samples = 100;
  std::string output_dir = "out";
  DomainSpec domain;
  int K_m = 8;
  std::string sigma_rule;
  double Lambda = 0.0;  // <= 0: mu / 8
  double N_trunc = 10.0;
  std::string drift = "tanh-sine";
  double drift_a = 0.5;
  IhrieConfig ihrie;
  FlowSettings flow;
  LyapunovSettings lyapunov;
  DichotomySettings dichotomy;
  MalliavinSettings malliavin;
  AllenCahnSettings allen_cahn;

  bool operator==(const ExperimentConfig&) const = default;
};

const std::vector<std::string>& experiment_names();
const std::vector<std::string>& config_keys();

// Flat "section.key = value" text. Throws ParseError (with line and column)
// or ValidationError listing every violated constraint.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& file);

// Parses without validation; missing receives the required keys that were absent.
ExperimentConfig parse_config_raw(const std::string& text, std::vector<std::string>* missing = nullptr);

// Assigns one key from its textual value.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);

std::vector<std::string> validate_config(const ExperimentConfig& cfg);
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace rps
