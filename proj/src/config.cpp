#include "chaosqfc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "chaosqfc/errors.hpp"

namespace chaosqfc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Shortest %g form that reads back to the same double.
std::string fmt_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw InvalidArgument("expected a number, got an empty value");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw InvalidArgument("expected a finite number, got '" + t + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t[0] == '-' || t[0] == '+') throw InvalidArgument("expected a non-negative integer, got '" + t + "'");
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw InvalidArgument("expected a non-negative integer, got '" + t + "'");
  return v;
}

bool parse_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw InvalidArgument("expected true or false, got '" + t + "'");
}

LinkMode parse_mode(const std::string& text) {
  const std::string t = trim(text);
  if (t == "auto") return LinkMode::automatic;
  if (t == "direct") return LinkMode::direct;
  if (t == "two_scale") return LinkMode::two_scale;
  throw InvalidArgument("expected auto, direct or two_scale, got '" + t + "'");
}

// "delay:amplitude,delay:amplitude"; empty for none.
std::vector<Tap> parse_taps(const std::string& text) {
  std::vector<Tap> taps;
  std::stringstream ss(trim(text));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw InvalidArgument("tap '" + item + "' is not delay:amplitude");
    taps.push_back({parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1))});
  }
  return taps;
}

std::string fmt_taps(const std::vector<Tap>& taps) {
  std::string s;
  for (const auto& t : taps) {
    if (!s.empty()) s += ',';
    s += fmt_double(t.delay_offset) + ':' + fmt_double(t.amplitude);
  }
  return s;
}

template <class M>
ConfigKey real_key(std::string key, std::string unit, std::string doc, M member) {
  return {std::move(key), std::move(unit), std::move(doc),
          [member](const RunConfig& c) { return fmt_double(member(const_cast<RunConfig&>(c))); },
          [member](RunConfig& c, const std::string& v) { member(c) = parse_double(v); }};
}

template <class M>
ConfigKey count_key(std::string key, std::string doc, M member) {
  return {std::move(key), "", std::move(doc),
          [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); },
          [member](RunConfig& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(member(c))>;
            member(c) = static_cast<T>(parse_uint(v));
          }};
}

template <class M>
ConfigKey bool_key(std::string key, std::string doc, M member) {
  return {std::move(key), "", std::move(doc),
          [member](const RunConfig& c) { return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false"); },
          [member](RunConfig& c, const std::string& v) { member(c) = parse_bool(v); }};
}

#define R(key, unit, doc, expr) real_key(key, unit, doc, [](RunConfig& c) -> double& { return expr; })
#define N(key, doc, expr) count_key(key, doc, [](RunConfig& c) -> auto& { return expr; })
#define B(key, doc, expr) bool_key(key, doc, [](RunConfig& c) -> bool& { return expr; })

std::vector<ConfigKey> build_schema() {
  std::vector<ConfigKey> k;
  k.push_back(R("source.center_wavelength", "m", "source centre wavelength", c.scenario.source.center_wavelength));
  k.push_back(R("source.fwhm_wavelength", "m", "source spectral FWHM", c.scenario.source.fwhm_wavelength));
  k.push_back(R("source.probe_flux", "photons/s", "transmitted probe flux", c.scenario.source.probe_flux));
  k.push_back(R("source.reference_power", "W", "reference arm power", c.scenario.source.reference_power));
  k.push_back(R("noise.flux", "photons/s", "uncorrelated chaotic noise at the receiver", c.scenario.noise_flux));
  k.push_back(R("target.reflectivity", "", "power reflectivity in [0,1]", c.scenario.target.reflectivity));
  k.push_back(R("target.delay", "s", "round-trip delay relative to the balanced path", c.scenario.target.round_trip_delay));
  k.push_back(R("target.doppler", "Hz", "Doppler shift", c.scenario.target.doppler_shift));
  k.push_back(R("target.vibration_rms", "rad", "rms of the vibration phase", c.scenario.target.vibration_rms));
  k.push_back(R("target.vibration_bandwidth", "Hz", "linewidth the vibration imprints on a tone",
                c.scenario.target.vibration_bandwidth));
  k.push_back({"target.taps", "s:amplitude", "extra echoes, comma separated delay_offset:amplitude",
               [](const RunConfig& c) { return fmt_taps(c.scenario.target.taps); },
               [](RunConfig& c, const std::string& v) { c.scenario.target.taps = parse_taps(v); }});
  k.push_back(R("reference.delay", "s", "reference delay-line setting", c.scenario.reference_delay));
  k.push_back(R("reference.delay_rate", "s/s", "delay-line scan speed", c.scenario.reference_delay_rate));
  k.push_back(R("dispersion.ps_per_nm", "ps/nm", "fibre dispersion on the probe path", c.scenario.dispersion.ps_per_nm));
  k.push_back(B("dispersion.compensated", "undo the dispersion before the receiver", c.scenario.dispersion.compensated));
  k.push_back(R("wg.gamma", "(photons/s)^-1/2 m^-1", "nonlinear coupling", c.scenario.wg.gamma));
  k.push_back(R("wg.length", "m", "waveguide length", c.scenario.wg.length));
  k.push_back(R("wg.delta_beta", "s/m", "inverse group velocity difference, SFG minus probe", c.scenario.wg.delta_beta));
  k.push_back(N("wg.z_steps", "initial split-step count", c.scenario.wg.n_z_steps));
  k.push_back(R("solver.drift_tolerance", "", "Manley-Rowe relative drift accepted", c.scenario.solver.drift_tolerance));
  k.push_back(N("solver.max_z_steps", "step count at which refinement gives up", c.scenario.solver.max_z_steps));
  k.push_back(R("det.bandpass_center", "Hz", "optical bandpass centre on the SFG baseband", c.scenario.det.optical_bandpass.center));
  k.push_back(R("det.bandpass_width", "Hz", "optical bandpass width", c.scenario.det.optical_bandpass.width));
  k.push_back(R("det.serrodyne_shift", "Hz", "serrodyne frequency shift", c.scenario.det.serrodyne_shift));
  k.push_back(N("det.serrodyne_levels", "staircase levels, 0 for an ideal sawtooth", c.scenario.det.serrodyne.levels));
  k.push_back(R("det.rbw", "Hz", "electrical resolution bandwidth", c.scenario.det.electrical_rbw));
  k.push_back(R("det.lo_flux", "photons/s", "local oscillator flux", c.scenario.det.lo_flux));
  k.push_back(R("det.integration_time", "s", "ESA integration time", c.scenario.det.integration_time));
  k.push_back(B("det.shot_noise", "add shot noise to the homodyne output", c.scenario.det.shot_noise));
  k.push_back(R("grid.dt", "s", "optical sample spacing", c.scenario.grid.dt));
  k.push_back(N("grid.samples", "optical samples per trial", c.scenario.grid.n_samples));
  k.push_back(R("electrical.sample_rate", "Hz", "electrical record sample rate", c.scenario.electrical.sample_rate));
  k.push_back(N("electrical.segments", "Welch segments per record", c.scenario.electrical.segments));
  k.push_back(N("electrical.records", "ESA records averaged", c.scenario.electrical.records));
  k.push_back({"link.mode", "", "auto, direct or two_scale",
               [](const RunConfig& c) { return std::string(to_string(c.scenario.mode)); },
               [](RunConfig& c, const std::string& v) { c.scenario.mode = parse_mode(v); }});
  k.push_back(N("run.trials", "optical trials per link run", c.scenario.n_trials));
  k.push_back(N("run.seed", "master seed", c.scenario.seed));
  k.push_back(R("sweep.reference_power_max", "W", "top of the reference power sweep", c.sweep.reference_power_max));
  k.push_back(N("sweep.points", "power points, starting at 0 W", c.sweep.points));
  k.push_back(N("sweep.trials", "trials per power point", c.sweep.trials));
  k.push_back(N("spectrum.trials", "ensemble size of the SFG spectrum", c.spectrum.trials));
  k.push_back(R("spectrum.noise_flux", "photons/s", "noise flux mixed into the spectrum run", c.spectrum.noise_flux));
  k.push_back(R("scan.span", "s", "total delay span, 0 for five envelope widths", c.scan.span));
  k.push_back(N("scan.points", "delay points", c.scan.points));
  k.push_back(R("scan.rbw", "Hz", "electrical rbw used while scanning", c.scan.rbw));
  k.push_back(N("scan.trials", "optical trials per delay point", c.scan.trials));
  k.push_back(R("noise_rejection.noise_flux", "photons/s", "noise flux of the rejection run", c.noise_rejection.noise_flux));
  k.push_back(R("vibration.rms", "rad", "vibration phase rms", c.vibration.rms));
  k.push_back(R("vibration.bandwidth", "Hz", "vibration linewidth", c.vibration.bandwidth));
  k.push_back(N("vibration.records", "ESA records averaged", c.vibration.records));
  k.push_back(R("heralding.sigma_m", "s", "pair correlation time", c.heralding.sigma_m));
  k.push_back(R("heralding.sigma_p_over_sigma_m", "", "pair duration over correlation time", c.heralding.sigma_p_over_sigma_m));
  k.push_back(R("heralding.minus_min", "", "smallest sigma_minus / sigma_m", c.heralding.minus_min));
  k.push_back(R("heralding.minus_max", "", "largest sigma_minus / sigma_m", c.heralding.minus_max));
  k.push_back(R("heralding.plus_min", "", "smallest sigma_plus / sigma_p", c.heralding.plus_min));
  k.push_back(R("heralding.plus_max", "", "largest sigma_plus / sigma_p", c.heralding.plus_max));
  k.push_back(N("heralding.points", "points per axis, log spaced", c.heralding.points));
  k.push_back(N("heralding.realizations", "CM realizations per point", c.heralding.realizations));
  k.push_back(B("heralding.check_halving", "repeat every point on a grid with dt/2", c.heralding.check_halving));
  k.push_back(N("heralding.gram_modes", "modes in the Gram matrix", c.heralding.gram_modes));
  k.push_back(R("heralding.gram_tbp", "", "time-bandwidth product of the Gram modes", c.heralding.gram_tbp));
  k.push_back(R("selectivity.cm_duration", "s", "chaotic mode duration", c.selectivity.cm_duration));
  k.push_back(R("selectivity.cm_bandwidth", "Hz", "chaotic mode bandwidth", c.selectivity.cm_bandwidth));
  k.push_back(R("selectivity.filter_bandwidth", "Hz", "spectral filter after conversion", c.selectivity.filter_bandwidth));
  k.push_back(R("selectivity.grating_width", "m", "grating bandpass width", c.selectivity.grating_width));
  k.push_back(R("selectivity.isfg_width", "m", "i-SFG background width", c.selectivity.isfg_width));
  return k;
}

#undef R
#undef N
#undef B

const ConfigKey* find_key(const std::string& key) {
  for (const auto& k : config_schema())
    if (k.key == key) return &k;
  return nullptr;
}

std::string unknown_key_message(const std::string& key) {
  std::string msg = "unknown key '" + key + "'; valid keys:";
  for (const auto& k : config_schema()) msg += " " + k.key;
  return msg;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = build_schema();
  return schema;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : config_schema()) out.push_back(k.key);
  return out;
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  const ConfigKey* k = find_key(trim(key));
  if (!k) throw ConfigError({unknown_key_message(trim(key))});
  try {
    k->set(cfg, value);
  } catch (const InvalidArgument& e) {
    throw ConfigError({k->key + ": " + e.what()});
  }
}

void apply_overrides(RunConfig& cfg, const std::map<std::string, std::string>& overrides) {
  std::vector<std::string> issues;
  for (const auto& [key, value] : overrides) {
    try {
      apply_override(cfg, key, value);
    } catch (const ConfigError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({std::string("parse: ") + e.what()});
  }
  RunConfig cfg = base;
  std::vector<std::string> issues;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      if (!body.data().empty()) issues.push_back(section + ": key outside a [section]");
      continue;
    }
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      const ConfigKey* k = find_key(key);
      if (!k) {
        issues.push_back(key + ": unknown key");
        continue;
      }
      std::string value = node.get_value<std::string>();
      if (const auto hash = value.find(" #"); hash != std::string::npos) value = value.substr(0, hash);
      try {
        k->set(cfg, value);
      } catch (const InvalidArgument& e) {
        issues.push_back(key + ": " + e.what());
      }
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), base);
}

std::vector<std::string> check_config(const RunConfig& cfg) {
  auto issues = cfg.scenario.check();
  auto need = [&](bool ok, const char* field, const char* msg) {
    if (!ok) issues.push_back(std::string(field) + ": " + msg);
  };
  need(cfg.sweep.reference_power_max > 0.0, "sweep.reference_power_max", "must be > 0 W");
  need(cfg.sweep.points >= 2, "sweep.points", "must be >= 2");
  need(cfg.sweep.trials >= 30, "sweep.trials", "must be >= 30");
  need(cfg.spectrum.trials >= 2, "spectrum.trials", "must be >= 2");
  need(cfg.spectrum.noise_flux >= 0.0, "spectrum.noise_flux", "flux must be >= 0 photons/s");
  need(cfg.scan.span >= 0.0, "scan.span", "must be >= 0 s");
  need(cfg.scan.points >= 5, "scan.points", "must be >= 5");
  need(cfg.scan.rbw > 0.0, "scan.rbw", "must be > 0 Hz");
  if (cfg.scan.rbw > 0.0 && cfg.scenario.det.integration_time > 0.0)
    need(cfg.scan.rbw >= (1.0 - 1e-12) / cfg.scenario.det.integration_time, "scan.rbw",
         "DetectionSpec invariant violated: electrical_rbw must be >= 1/integration_time");
  need(cfg.scan.trials >= 2, "scan.trials", "must be >= 2");
  need(cfg.noise_rejection.noise_flux >= 0.0, "noise_rejection.noise_flux", "flux must be >= 0 photons/s");
  need(cfg.vibration.rms >= 0.0, "vibration.rms", "must be >= 0 rad");
  need(cfg.vibration.bandwidth >= 0.0, "vibration.bandwidth", "must be >= 0 Hz");
  need(cfg.vibration.records >= 1, "vibration.records", "must be >= 1");
  const auto& h = cfg.heralding;
  need(h.sigma_m > 0.0, "heralding.sigma_m", "must be > 0 s");
  need(h.sigma_p_over_sigma_m >= 1.0, "heralding.sigma_p_over_sigma_m", "must be >= 1");
  need(h.minus_min > 0.0 && h.minus_max >= h.minus_min, "heralding.minus_min", "need 0 < minus_min <= minus_max");
  need(h.plus_min > 0.0 && h.plus_max >= h.plus_min, "heralding.plus_min", "need 0 < plus_min <= plus_max");
  need(h.points >= 1, "heralding.points", "must be >= 1");
  need(h.realizations >= 100, "heralding.realizations", "must be >= 100");
  need(h.gram_modes >= 2, "heralding.gram_modes", "must be >= 2");
  need(h.gram_tbp >= 10.0, "heralding.gram_tbp", "must be >= 10");
  const auto& s = cfg.selectivity;
  need(s.cm_duration > 0.0, "selectivity.cm_duration", "must be > 0 s");
  need(s.cm_bandwidth > 0.0, "selectivity.cm_bandwidth", "must be > 0 Hz");
  need(s.filter_bandwidth > 0.0, "selectivity.filter_bandwidth", "must be > 0 Hz");
  need(s.grating_width > 0.0, "selectivity.grating_width", "must be > 0 m");
  need(s.isfg_width > 0.0, "selectivity.isfg_width", "must be > 0 m");
  return issues;
}

std::map<std::string, std::string> resolved_parameters(const RunConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& k : config_schema()) out[k.key] = k.get(cfg);
  return out;
}

std::string format_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& k : config_schema()) {
    const auto dot = k.key.find('.');
    const std::string sec = k.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += "; " + k.doc;
    if (!k.unit.empty()) out += " [" + k.unit + "]";
    out += '\n';
    out += k.key.substr(dot + 1) + " = " + k.get(cfg) + '\n';
  }
  return out;
}

}  // namespace chaosqfc
