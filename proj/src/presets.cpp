#include "chaosqfc/presets.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "chaosqfc/defaults.hpp"
#include "chaosqfc/efficiency.hpp"
#include "chaosqfc/errors.hpp"
#include "chaosqfc/fft.hpp"
#include "chaosqfc/parallel.hpp"
#include "chaosqfc/quantum.hpp"
#include "chaosqfc/random.hpp"
#include "chaosqfc/units.hpp"

#ifndef CHAOSQFC_VERSION
#define CHAOSQFC_VERSION "unknown"
#endif

namespace chaosqfc {

namespace fs = std::filesystem;
using units::kPi;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Collects the files a preset writes, in order.
class RunDir {
 public:
  explicit RunDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) {
    std::string text;
    for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
    text += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) text += (i ? "," : "") + num(r[i]);
      text += '\n';
    }
    text_file(name, text);
  }

  void text_file(const std::string& name, const std::string& text) {
    std::ofstream f(dir_ / name, std::ios::binary);
    f << text;
    f.close();
    if (!f) throw IoError("cannot write " + (dir_ / name).string());
    names_.push_back(name);
  }

  template <class W>
  void binary_file(const std::string& name, W&& writer) {
    std::ofstream f(dir_ / name, std::ios::binary);
    writer(f);
    f.close();
    if (!f) throw IoError("cannot write " + (dir_ / name).string());
    names_.push_back(name);
  }

  const fs::path& path() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

using Metrics = std::map<std::string, double>;

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  auto v = linspace(std::log(a), std::log(b), n);
  for (auto& x : v) x = std::exp(x);
  if (n > 1) v.back() = b;
  return v;
}

// ESA rows within +-half_span of f0.
std::vector<std::vector<double>> esa_rows(const SpectrumEstimate& s, double f0, double half_span) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.frequencies.size(); ++i)
    if (std::abs(s.frequencies[i] - f0) <= half_span) rows.push_back({s.frequencies[i], s.psd[i], s.resolution_bandwidth});
  return rows;
}

nlohmann::json summary_json(const LinkSummary& s) {
  return {{"mode", s.mode},
          {"received_probe_flux", s.received_probe_flux},
          {"noise_flux", s.noise_flux},
          {"c_sfg_flux", s.c_sfg_flux},
          {"c_sfg_flux_se", s.c_sfg_flux_se},
          {"i_sfg_flux", s.i_sfg_flux},
          {"i_sfg_density", s.i_sfg_density},
          {"c_sfg_efficiency", s.c_sfg_efficiency},
          {"line_frequency", s.line_frequency},
          {"line_peak_power", s.line.peak_power},
          {"line_floor_power", s.line.floor_power},
          {"line_fwhm", s.line.fwhm},
          {"snr", s.snr},
          {"optical_snr", s.optical_snr},
          {"dd_snr", s.dd_snr},
          {"enhancement_db", s.enhancement_db},
          {"predicted_enhancement_db", s.predicted_enhancement_db},
          {"peak_detected", s.peak_detected},
          {"manley_rowe_drift", s.manley_rowe_drift},
          {"z_steps_max", s.z_steps_max},
          {"n_trials", s.n_trials}};
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

Metrics efficiency_sweep(const RunConfig& cfg, RunDir& dir) {
  const auto& s = cfg.scenario;
  const CorrelationSpec probe = s.probe_spec();
  const auto powers = linspace(0.0, cfg.sweep.reference_power_max, cfg.sweep.points);
  std::vector<double> fluxes;
  for (double p : powers) fluxes.push_back(units::watts_to_flux(p, s.source.center_wavelength));
  const SweepGrid grid{s.grid.dt, s.grid.n_samples};
  const auto stats = run_stage("efficiency_sweep", [&] {
    return run_efficiency_sweep(probe, s.wg, fluxes, cfg.sweep.trials, s.seed, grid, s.solver);
  });

  std::vector<std::vector<double>> rows;
  Metrics m;
  std::size_t best = 0;
  double drift = 0.0;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto& st = stats[i];
    const double theta = s.wg.gamma * std::sqrt(fluxes[i]) * s.wg.length;
    rows.push_back({powers[i], st.total_sfg_efficiency.mean, st.total_sfg_efficiency.se, st.c_sfg_efficiency.mean,
                    st.c_sfg_efficiency.se, st.baseline_efficiency, analytic_cw_efficiency(theta, 0.0, probe.sigma)});
    if (st.c_sfg_efficiency.mean > stats[best].c_sfg_efficiency.mean) best = i;
    drift = std::max(drift, st.max_drift);
    failed += st.n_failed;
  }
  dir.csv("efficiency_sweep.csv",
          {"reference_power", "total_eff", "total_eff_se", "csfg_eff", "csfg_eff_se", "cw_eff", "cw_eff_theory"}, rows);
  m["peak_reference_power"] = powers[best];
  m["peak_csfg_eff"] = stats[best].c_sfg_efficiency.mean;
  m["peak_csfg_eff_se"] = stats[best].c_sfg_efficiency.se;
  m["peak_total_eff"] = stats[best].total_sfg_efficiency.mean;
  m["peak_total_eff_se"] = stats[best].total_sfg_efficiency.se;
  m["trials_per_point"] = static_cast<double>(cfg.sweep.trials);
  m["failed_trials"] = static_cast<double>(failed);
  m["max_manley_rowe_drift"] = drift;
  return m;
}

Metrics sfg_spectrum(const RunConfig& cfg, RunDir& dir) {
  const auto& s = cfg.scenario;
  s.validate();
  const std::size_t n = s.grid.n_samples;
  const double dt = s.grid.dt;
  const double duration = s.grid.duration();
  const double sigma = s.source.sigma();
  const double pp = s.source.probe_flux, pr = s.source.reference_flux(), pn = cfg.spectrum.noise_flux;
  const std::size_t trials = cfg.spectrum.trials;

  std::vector<MemberMoments> moments(trials);
  std::vector<std::vector<double>> periodograms(trials);
  run_stage("sfg_spectrum", [&] {
    parallel_for(trials, [&](std::size_t k) {
      const std::uint64_t seed = member_seed(s.seed, k);
      auto pair = synthesize_chaotic_pair({pp, sigma}, pr, duration, dt, seed);
      if (pn > 0.0) {
        const auto noise = synthesize_noise({pn, sigma}, duration, dt, seed);
        for (std::size_t j = 0; j < n; ++j) pair.probe.samples[j] += noise.samples[j];
      }
      const auto out = sfg_small_signal(pair.probe, pair.reference, s.wg);
      moments[k] = member_moments(out);
      auto spec = out.samples;
      fft::forward(spec);
      auto& p = periodograms[k];
      p.resize(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = std::norm(spec[i]) * dt / static_cast<double>(n);
    });
    return 0;
  });

  // Ascending frequency order.
  std::vector<double> freqs(n), psd(n, 0.0);
  const double df = 1.0 / duration;
  for (std::size_t i = 0; i < n; ++i) {
    const long b = static_cast<long>(i) - static_cast<long>(n / 2);
    freqs[i] = static_cast<double>(b) * df;
    const std::size_t slot = static_cast<std::size_t>((b + static_cast<long>(n)) % static_cast<long>(n));
    KahanSum acc;
    for (const auto& p : periodograms) acc.add(p[slot]);
    psd[i] = acc.value() / static_cast<double>(trials);
  }
  const auto theory = analytic_sfg_psd(pp, pr, pn, sigma, s.wg, freqs);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back({freqs[i], psd[i], theory.psd[i]});
  dir.csv("sfg_spectrum.csv", {"freq_hz", "psd", "analytic_psd"}, rows);

  const auto d = decompose_moments(moments, static_cast<double>(n));
  const double gl = s.wg.gamma * s.wg.length;
  Metrics m;
  m["coherent_weight"] = d.coherent_flux;
  m["coherent_weight_se"] = d.coherent_se;
  m["coherent_expected"] = gl * gl * pp * pr;
  m["coherent_ratio"] = d.coherent_flux / (gl * gl * pp * pr);
  m["isfg_power"] = d.incoherent_flux;
  m["isfg_expected"] = analytic_isfg_power(pp, pr, pn, sigma, s.wg);
  m["isfg_ratio"] = d.incoherent_flux / m["isfg_expected"];
  m["trials"] = static_cast<double>(trials);

  // Deepest bin near each expected sinc^2 null.
  const double tw = s.wg.walkoff_window();
  double worst = 0.0;
  for (int k : {-3, -2, -1, 1, 2, 3}) {
    const double f0 = k / tw;
    std::size_t at = n;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(freqs[i] - f0) <= 0.3 / tw && (at == n || psd[i] < psd[at])) at = i;
    if (at == n) continue;
    const double off = (freqs[at] - f0) / df;
    m["null_" + std::string(k < 0 ? "m" : "p") + std::to_string(std::abs(k)) + "_offset_bins"] = off;
    worst = std::max(worst, std::abs(off));
  }
  m["null_max_offset_bins"] = worst;
  m["null_spacing_expected_hz"] = 1.0 / tw;
  m["bin_width_hz"] = df;
  return m;
}

void write_link_outputs(RunDir& dir, const std::string& stem, const LinkResult& r, double half_span) {
  dir.csv(stem + "_esa.csv", {"freq_hz", "psd", "rbw"}, esa_rows(r.esa, r.summary.line_frequency, half_span));
  dir.text_file(stem + "_summary.json", json_text(summary_json(r.summary)));
}

Metrics noise_rejection(const RunConfig& cfg, RunDir& dir) {
  ScenarioConfig s = cfg.scenario;
  s.noise_flux = cfg.noise_rejection.noise_flux;
  const auto r = run_stage("link", [&] { return simulate_link(s); });
  write_link_outputs(dir, "link", r, std::max(20e3, 200.0 * r.esa.resolution_bandwidth));
  const std::size_t keep = std::min<std::size_t>(r.trace.rf_samples.size(), 65536);
  dir.binary_file("homodyne_trace.bin", [&](std::ostream& os) {
    write_real_trace(os, std::span<const double>(r.trace.rf_samples.data(), keep), r.trace.dt);
  });
  const auto& x = r.summary;
  const auto f = snr_formulas(x.received_probe_flux, s.noise_flux, s.source.sigma(), r.esa.resolution_bandwidth);
  Metrics m;
  m["rbw_hz"] = r.esa.resolution_bandwidth;
  m["enhancement_db"] = x.enhancement_db;
  m["predicted_enhancement_db"] = f.enhancement_db;
  m["optical_snr"] = x.optical_snr;
  m["dd_snr"] = x.dd_snr;
  m["homodyne_snr"] = x.snr;
  m["peak_detected"] = x.peak_detected ? 1.0 : 0.0;
  m["c_sfg_flux"] = x.c_sfg_flux;
  m["i_sfg_density"] = x.i_sfg_density;
  m["max_manley_rowe_drift"] = x.manley_rowe_drift;
  m["two_scale"] = x.mode == "two_scale" ? 1.0 : 0.0;
  return m;
}

Metrics range_scan_preset(const RunConfig& cfg, RunDir& dir) {
  ScenarioConfig s = cfg.scenario;
  s.det.electrical_rbw = cfg.scan.rbw;
  s.n_trials = cfg.scan.trials;
  s.validate();
  const double fw = ranging_fwhm(s.source.sigma());
  const double span = cfg.scan.span > 0.0 ? cfg.scan.span : 5.0 * fw;
  const double t0 = s.target.round_trip_delay;
  const auto delays = linspace(t0 - span / 2.0, t0 + span / 2.0, cfg.scan.points);
  const auto p = run_stage("range_scan", [&] { return range_scan(s, delays); });
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < delays.size(); ++i)
    rows.push_back({delays[i], units::delay_to_distance(delays[i]), p.signal[i], p.signal_se[i]});
  dir.csv("range_scan.csv", {"delay_s", "distance_m", "signal", "signal_se"}, rows);
  const double step = delays[1] - delays[0];
  Metrics m;
  m["true_delay"] = t0;
  m["fitted_center"] = p.fitted_center;
  m["center_error"] = p.fitted_center - t0;
  m["delay_step"] = step;
  m["optical_dt"] = s.grid.dt;
  m["fitted_fwhm"] = p.fitted_fwhm;
  m["expected_fwhm"] = fw;
  m["fwhm_ratio"] = p.fitted_fwhm / fw;
  m["distance_resolution_m"] = p.peak_detected() ? units::delay_to_distance(p.fitted_fwhm) : kNaN;
  m["expected_distance_resolution_m"] = units::delay_to_distance(fw);
  m["peak_detected"] = p.peak_detected() ? 1.0 : 0.0;
  m["max_manley_rowe_drift"] = p.max_drift;
  return m;
}

Metrics vibration_preset(const RunConfig& cfg, RunDir& dir) {
  ScenarioConfig still = cfg.scenario;
  still.target.vibration_rms = 0.0;
  still.target.vibration_bandwidth = 0.0;
  still.electrical.records = cfg.vibration.records;
  ScenarioConfig shaking = still;
  shaking.target.vibration_rms = cfg.vibration.rms;
  shaking.target.vibration_bandwidth = cfg.vibration.bandwidth;
  const auto a = run_stage("stabilized", [&] { return simulate_link(still); });
  const auto b = run_stage("vibrating", [&] { return simulate_link(shaking); });
  const double half = std::max(60.0 * cfg.vibration.bandwidth, 200.0 * a.esa.resolution_bandwidth);
  write_link_outputs(dir, "stabilized", a, half);
  write_link_outputs(dir, "vibrating", b, half);
  const double pa = a.summary.line.peak_power - a.summary.line.floor_power;
  const double pb = b.summary.line.peak_power - b.summary.line.floor_power;
  Metrics m;
  m["rbw_hz"] = a.esa.resolution_bandwidth;
  m["stabilized_peak_excess"] = pa;
  m["vibrating_peak_excess"] = pb;
  m["peak_drop_db"] = pa > 0.0 && pb > 0.0 ? units::to_db(pa / pb) : kNaN;
  m["vibrating_fwhm_hz"] = b.summary.line.fwhm;
  m["vibration_bandwidth_hz"] = cfg.vibration.bandwidth;
  m["fwhm_ratio"] = b.summary.line.fwhm / cfg.vibration.bandwidth;
  m["stabilized_c_sfg_flux"] = a.summary.c_sfg_flux;
  m["vibrating_c_sfg_flux"] = b.summary.c_sfg_flux;
  m["max_manley_rowe_drift"] = std::max(a.summary.manley_rowe_drift, b.summary.manley_rowe_drift);
  return m;
}

Metrics heralding_map(const RunConfig& cfg, RunDir& dir) {
  const auto& h = cfg.heralding;
  const GaussianJTA jta{h.sigma_m, h.sigma_m * h.sigma_p_over_sigma_m};
  jta.validate();
  const auto minus = logspace(h.minus_min, h.minus_max, h.points);
  const auto plus = logspace(h.plus_min, h.plus_max, h.points);
  const std::size_t np = h.points;
  std::vector<HeraldingResult> res(np * np), half(np * np);
  run_stage("heralding", [&] {
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = 0; j < np; ++j) {
        const double sp = plus[i] * jta.sigma_p, sm = minus[j] * jta.sigma_m;
        const auto grid = heralding_grid(jta, sp, sm);
        const std::uint64_t seed = member_seed(cfg.scenario.seed, i * np + j);
        res[i * np + j] = heralding_probability(jta, sp, sm, h.realizations, grid, seed);
        if (h.check_halving) half[i * np + j] = heralding_probability(jta, sp, sm, h.realizations, grid.halved(), seed);
      }
    return 0;
  });

  std::vector<std::vector<double>> rows;
  Metrics m;
  double lo = 1.0, hi = 0.0, dmax = 0.0, rlo = 1.0, rhi = 0.0;
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < np; ++j) {
      const auto& r = res[i * np + j];
      const double hv = h.check_halving ? half[i * np + j].probability : kNaN;
      rows.push_back({plus[i], minus[j], r.probability, r.standard_error, hv});
      lo = std::min(lo, r.probability);
      hi = std::max(hi, r.probability);
      rlo = std::min(rlo, r.min_value);
      rhi = std::max(rhi, r.max_value);
      if (h.check_halving) dmax = std::max(dmax, std::abs(hv - r.probability));
    }
  dir.csv("heralding_map.csv", {"sigma_plus_ratio", "sigma_minus_ratio", "probability", "se", "probability_halved"},
          rows);

  // Steps against the expected trend by more than two combined errors.
  auto at = [&](std::size_t i, std::size_t j) { return res[i * np + j]; };
  auto against = [](const HeraldingResult& from, const HeraldingResult& to) {
    const double tol = 2.0 * std::hypot(from.standard_error, to.standard_error);
    return to.probability < from.probability - tol;
  };
  std::size_t violations = 0, checked = 0;
  for (std::size_t i = 0; i < np; ++i)
    if (plus[i] <= 0.3 * (1.0 + 1e-9))
      for (std::size_t j = 0; j + 1 < np; ++j, ++checked) violations += against(at(i, j), at(i, j + 1));
  for (std::size_t j = 0; j < np; ++j)
    if (minus[j] >= 3.0 * (1.0 - 1e-9))
      for (std::size_t i = 0; i + 1 < np; ++i, ++checked) violations += against(at(i + 1, j), at(i, j));
  m["corner_probability"] = at(0, np - 1).probability;
  m["corner_sigma_minus_ratio"] = minus[np - 1];
  m["corner_sigma_plus_ratio"] = plus[0];
  m["min_probability"] = lo;
  m["max_probability"] = hi;
  m["min_single_realization"] = rlo;
  m["max_single_realization"] = rhi;
  m["max_halving_change"] = h.check_halving ? dmax : kNaN;
  m["monotonic_steps_checked"] = static_cast<double>(checked);
  m["monotonic_violations"] = static_cast<double>(violations);

  // Gram matrix of independent CMs with the requested TBP.
  const double sp = jta.sigma_p;
  const double sm = sp / h.gram_tbp;
  const double gdt = sm / 4.0;
  const auto gn = static_cast<std::size_t>(std::ceil(8.0 * sp / gdt));
  const TimeGrid ggrid{gdt, gn + (gn & 1)};
  std::vector<ChaoticModePair> modes(h.gram_modes);
  run_stage("gram", [&] {
    parallel_for(h.gram_modes, [&](std::size_t k) {
      modes[k] = sample_cm_pair(sp, sm, ggrid, member_seed(cfg.scenario.seed, np * np + k));
    });
    return 0;
  });
  const auto g = cm_gram_matrix(modes);
  std::vector<std::vector<double>> grows;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j)
      grows.push_back({static_cast<double>(i), static_cast<double>(j), g(i, j).real(), g(i, j).imag(), std::norm(g(i, j))});
  dir.csv("gram_matrix.csv", {"i", "j", "re", "im", "abs2"}, grows);
  m["gram_tbp"] = h.gram_tbp;
  m["gram_mean_offdiagonal_abs2"] = g.mean_offdiagonal_abs2();
  return m;
}

Metrics selectivity_preset(const RunConfig& cfg, RunDir& dir) {
  const auto& s = cfg.selectivity;
  const auto e = run_stage("selectivity", [&] {
    return selectivity_estimate(s.cm_duration, s.cm_bandwidth, s.filter_bandwidth);
  });
  const double isfg_pass = bandpass_transmission(s.grating_width, s.isfg_width);
  Metrics m;
  m["tbp"] = s.cm_duration * s.cm_bandwidth;
  m["efficiency_bound"] = e.efficiency_bound;
  m["crosstalk_rejection"] = e.crosstalk_rejection;
  m["crosstalk_suppression_db"] = units::to_db(1.0 / e.transmitted_fraction);
  m["transmitted_fraction"] = e.transmitted_fraction;
  m["target_spectral_width_hz"] = e.target_spectral_width;
  m["clipped"] = e.clipped ? 1.0 : 0.0;
  m["isfg_transmitted_fraction"] = isfg_pass;
  m["isfg_reduction"] = 1.0 - isfg_pass;
  std::vector<std::vector<double>> rows;
  // Filter bandwidth scan around the configured value.
  for (double f : logspace(s.filter_bandwidth / 100.0, s.filter_bandwidth * 100.0, 21)) {
    const auto x = selectivity_estimate(s.cm_duration, s.cm_bandwidth, f);
    rows.push_back({f, x.efficiency_bound, x.crosstalk_rejection, x.transmitted_fraction, x.clipped ? 1.0 : 0.0});
  }
  dir.csv("selectivity.csv", {"filter_bandwidth_hz", "efficiency_bound", "crosstalk_rejection", "transmitted_fraction", "clipped"},
          rows);
  return m;
}

using PresetFn = Metrics (*)(const RunConfig&, RunDir&);

const std::map<std::string, PresetFn>& registry() {
  static const std::map<std::string, PresetFn> r = {
      {"efficiency-sweep", efficiency_sweep}, {"sfg-spectrum", sfg_spectrum},
      {"noise-rejection", noise_rejection},   {"range-scan", range_scan_preset},
      {"vibration", vibration_preset},        {"heralding-map", heralding_map},
      {"selectivity", selectivity_preset}};
  return r;
}

std::string summary_text(const std::string& preset, const Metrics& m, const std::vector<std::string>& files) {
  std::string s = "preset = " + preset + "\n";
  for (const auto& [k, v] : m) s += k + " = " + num(v) + "\n";
  for (const auto& f : files) s += "output = " + f + "\n";
  return s;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"efficiency-sweep", "sfg-spectrum", "noise-rejection", "range-scan",
                                                 "vibration",        "heralding-map", "selectivity"};
  return names;
}

std::string trials_key(const std::string& preset) {
  if (preset == "efficiency-sweep") return "sweep.trials";
  if (preset == "sfg-spectrum") return "spectrum.trials";
  if (preset == "range-scan") return "scan.trials";
  if (preset == "heralding-map") return "heralding.realizations";
  if (preset == "noise-rejection" || preset == "vibration") return "run.trials";
  return {};
}

RunManifest run_preset(const std::string& name, const RunConfig& cfg, const fs::path& out_dir) {
  const auto& reg = registry();
  const auto it = reg.find(name);
  if (it == reg.end()) {
    std::string msg = "unknown preset '" + name + "'; valid presets:";
    for (const auto& n : preset_names()) msg += " " + n;
    throw ConfigError({msg});
  }
  if (auto issues = check_config(cfg); !issues.empty()) throw ConfigError(std::move(issues));

  const auto start = std::chrono::steady_clock::now();
  RunDir dir(out_dir);
  const Metrics metrics = it->second(cfg, dir);
  dir.text_file("summary.txt", summary_text(name, metrics, dir.names()));

  RunManifest m;
  m.preset = name;
  m.parameters = resolved_parameters(cfg);
  m.seed = cfg.scenario.seed;
  m.code_version = CHAOSQFC_VERSION;
  m.metrics = metrics;
  for (const auto& f : dir.names()) m.outputs.push_back({f, sha256_file(dir.path() / f)});
  m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(m, dir.path() / "manifest.json");
  return m;
}

RunManifest run_preset(const std::string& name, const std::map<std::string, std::string>& overrides,
                       const fs::path& out_dir) {
  RunConfig cfg = default_config();
  apply_overrides(cfg, overrides);
  return run_preset(name, cfg, out_dir);
}

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["preset"] = m.preset;
  j["seed"] = m.seed;
  j["code_version"] = m.code_version;
  j["wall_clock_s"] = m.wall_clock_s;
  j["parameters"] = m.parameters;
  nlohmann::ordered_json outs = nlohmann::ordered_json::array();
  for (const auto& o : m.outputs) outs.push_back({{"file", o.name}, {"sha256", o.sha256}});
  j["outputs"] = outs;
  nlohmann::ordered_json met = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.metrics) {
    if (std::isfinite(v))
      met[k] = v;
    else
      met[k] = nullptr;
  }
  j["metrics"] = met;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& m, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  f << manifest_to_json(m);
  f.close();
  if (!f) throw IoError("cannot write " + path.string());
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read manifest " + path.string());
  nlohmann::json j;
  try {
    f >> j;
    RunManifest m;
    m.preset = j.at("preset").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.code_version = j.at("code_version").get<std::string>();
    m.wall_clock_s = j.value("wall_clock_s", 0.0);
    m.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
    for (const auto& o : j.at("outputs")) m.outputs.push_back({o.at("file").get<std::string>(), o.at("sha256").get<std::string>()});
    if (j.contains("metrics"))
      for (const auto& [k, v] : j["metrics"].items()) m.metrics[k] = v.is_null() ? kNaN : v.get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({"manifest: " + std::string(e.what())});
  }
}

RerunReport rerun_manifest(const fs::path& manifest, const fs::path& out_dir) {
  RerunReport rep;
  rep.original = read_manifest(manifest);
  RunConfig cfg = default_config();
  apply_overrides(cfg, rep.original.parameters);
  rep.rerun = run_preset(rep.original.preset, cfg, out_dir);
  std::map<std::string, std::string> fresh;
  for (const auto& o : rep.rerun.outputs) fresh[o.name] = o.sha256;
  for (const auto& o : rep.original.outputs) {
    const auto it = fresh.find(o.name);
    if (it == fresh.end() || it->second != o.sha256) rep.mismatches.push_back(o.name);
  }
  return rep;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256 unavailable");
  }
  std::vector<char> buf(1 << 16);
  while (f) {
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (f.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(f.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace chaosqfc
