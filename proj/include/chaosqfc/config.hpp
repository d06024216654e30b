#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "chaosqfc/scenario.hpp"

namespace chaosqfc {

struct SweepSettings {
  double reference_power_max = 1.0;  // W
  std::size_t points = 21;
  std::size_t trials = 200;
};

struct SpectrumSettings {
  std::size_t trials = 1000;
  double noise_flux = 0.0;
};

struct ScanSettings {
  double span = 0.0;  // s, 0 picks 5 envelope widths
  std::size_t points = 31;
  double rbw = 1e3;   // Hz
  std::size_t trials = 64;
};

struct NoiseRejectionSettings {
  double noise_flux = 1e14;
};

struct VibrationSettings {
  double rms = 4.0;          // rad
  double bandwidth = 1e3;    // Hz
  std::size_t records = 4;
};

struct HeraldingSettings {
  double sigma_m = 1e-12;  // s
  double sigma_p_over_sigma_m = 100.0;
  double minus_min = 0.3, minus_max = 10.0;  // sigma_minus / sigma_m
  double plus_min = 0.1, plus_max = 3.0;     // sigma_plus / sigma_p
  std::size_t points = 5;
  std::size_t realizations = 200;
  bool check_halving = true;
  std::size_t gram_modes = 16;
  double gram_tbp = 1e3;
};

struct SelectivitySettings {
  double cm_duration = 100e-9;     // s
  double cm_bandwidth = 1e12;      // Hz
  double filter_bandwidth = 10e6;  // Hz
  double grating_width = 0.12e-9;  // m
  double isfg_width = 3.7e-9;      // m
};

struct RunConfig {
  ScenarioConfig scenario;
  SweepSettings sweep;
  SpectrumSettings spectrum;
  ScanSettings scan;
  NoiseRejectionSettings noise_rejection;
  VibrationSettings vibration;
  HeraldingSettings heralding;
  SelectivitySettings selectivity;
};

struct ConfigKey {
  std::string key;
  std::string unit;
  std::string doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;  // throws InvalidArgument on bad text
};

const std::vector<ConfigKey>& config_schema();
std::vector<std::string> config_keys();

// Throws ConfigError naming the key; unknown keys list the valid ones.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);
void apply_overrides(RunConfig& cfg, const std::map<std::string, std::string>& overrides);

// Flat INI ("[section]" + "key = value"), keys as section.key. Collects all
// parse errors before throwing ConfigError. Missing keys keep the defaults.
RunConfig load_config(const std::string& path, const RunConfig& base);
RunConfig parse_config(const std::string& text, const RunConfig& base);

// Every invariant, as "field: message".
std::vector<std::string> check_config(const RunConfig& cfg);

std::map<std::string, std::string> resolved_parameters(const RunConfig& cfg);
// INI text with unit comments; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& cfg);

}  // namespace chaosqfc
