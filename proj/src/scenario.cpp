#include "chaosqfc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chaosqfc/errors.hpp"
#include "chaosqfc/fft.hpp"
#include "chaosqfc/parallel.hpp"
#include "chaosqfc/random.hpp"
#include "chaosqfc/units.hpp"

namespace chaosqfc {

using units::kPi;

double SourceSettings::sigma() const {
  return units::fwhm_to_sigma(units::wavelength_span_to_hz(fwhm_wavelength, center_wavelength));
}
double SourceSettings::reference_flux() const { return units::watts_to_flux(reference_power, center_wavelength); }
double SourceSettings::carrier_frequency() const { return units::optical_frequency(center_wavelength); }

const char* to_string(LinkMode m) {
  switch (m) {
    case LinkMode::direct:
      return "direct";
    case LinkMode::two_scale:
      return "two_scale";
    default:
      return "auto";
  }
}

CorrelationSpec ScenarioConfig::probe_spec() const { return {source.probe_flux, source.sigma()}; }

std::vector<std::string> ScenarioConfig::check() const {
  std::vector<std::string> issues;
  auto need = [&](bool ok, const char* field, const std::string& msg) {
    if (!ok) issues.push_back(std::string(field) + ": " + msg);
  };
  need(source.center_wavelength > 0.0, "source.center_wavelength", "must be > 0 m");
  need(source.fwhm_wavelength > 0.0, "source.fwhm_wavelength", "must be > 0 m");
  need(source.probe_flux >= 0.0, "source.probe_flux", "flux must be >= 0 photons/s");
  need(source.reference_power >= 0.0, "source.reference_power", "power must be >= 0 W");
  need(noise_flux >= 0.0, "noise.flux", "flux must be >= 0 photons/s");
  need(target.reflectivity >= 0.0 && target.reflectivity <= 1.0, "target.reflectivity", "must lie in [0, 1]");
  need(target.vibration_rms >= 0.0, "target.vibration_rms", "must be >= 0 rad");
  need(target.vibration_bandwidth >= 0.0, "target.vibration_bandwidth", "must be >= 0 Hz");
  need(wg.gamma >= 0.0, "wg.gamma", "must be >= 0");
  need(wg.length > 0.0, "wg.length", "must be > 0 m");
  need(wg.n_z_steps >= 16, "wg.z_steps", "must be >= 16");
  need(solver.drift_tolerance > 0.0, "solver.drift_tolerance", "must be > 0");
  need(solver.max_z_steps >= wg.n_z_steps, "solver.max_z_steps", "must be >= wg.z_steps");
  need(grid.dt > 0.0, "grid.dt", "must be > 0 s");
  need(grid.n_samples >= 16, "grid.samples", "must be >= 16");
  need(n_trials >= 2, "run.trials", "must be >= 2");
  need(det.integration_time > 0.0, "det.integration_time", "must be > 0 s");
  need(det.electrical_rbw > 0.0, "det.rbw", "must be > 0 Hz");
  if (det.integration_time > 0.0)
    need(det.electrical_rbw >= (1.0 - 1e-12) / det.integration_time, "det.rbw",
         "DetectionSpec invariant violated: electrical_rbw must be >= 1/integration_time");
  need(det.optical_bandpass.width > det.electrical_rbw, "det.bandpass_width",
       "DetectionSpec invariant violated: optical width must exceed electrical_rbw");
  need(det.lo_flux > 0.0, "det.lo_flux", "must be > 0 photons/s");
  need(det.serrodyne.levels != 1, "det.serrodyne_levels", "use 0 (ideal) or >= 2");
  need(electrical.sample_rate > 0.0, "electrical.sample_rate", "must be > 0 Hz");
  need(electrical.segments >= 1, "electrical.segments", "must be >= 1");
  need(electrical.records >= 1, "electrical.records", "must be >= 1");
  if (electrical.sample_rate > 0.0)
    need(std::abs(det.serrodyne_shift) < electrical.sample_rate / 8.0, "det.serrodyne_shift",
         "must be below a quarter of the electrical Nyquist frequency");
  if (!issues.empty()) return issues;

  const double sigma = source.sigma();
  const double duration = grid.duration();
  need(grid.dt <= (1.0 + 1e-9) / (8.0 * sigma), "grid.dt", "must be <= 1/(8 sigma) of the source");
  need(duration >= (1.0 - 1e-9) * 10.0 / sigma, "grid.samples", "record must span >= 10/sigma");
  need(std::abs(reference_delay) <= duration / 4.0, "reference.delay", "must lie within +-duration/4");
  need(std::abs(target.round_trip_delay) <= duration / 4.0, "target.delay", "must lie within +-duration/4");
  if (wg.delta_beta != 0.0)
    need(std::abs(wg.walkoff_window()) >= 4.0 * grid.dt * (1.0 - 1e-9), "wg.delta_beta",
         "walk-off window must span >= 4 samples of grid.dt");
  const double nyq = 0.5 / grid.dt;
  need(std::abs(det.optical_bandpass.center) + 0.5 * det.optical_bandpass.width <= nyq * (1.0 + 1e-12),
       "det.bandpass_width", "band extends outside the optical Nyquist range");
  need(det.optical_bandpass.width >= 2.0 / duration, "det.bandpass_width", "must span >= 2 frequency bins");
  if (dispersion.ps_per_nm != 0.0) {
    const double beta = kPi * units::ps_per_nm_to_si(dispersion.ps_per_nm) * source.center_wavelength *
                        source.center_wavelength / units::kSpeedOfLight;
    need(std::abs(beta) * nyq / kPi <= 0.5 * duration, "dispersion.ps_per_nm",
         "group delay spread exceeds the optical record");
  }
  return issues;
}

void ScenarioConfig::validate() const {
  auto issues = check();
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

namespace {

struct Fields {
  ComplexEnvelope probe_rx;
  ComplexEnvelope reference;
  std::optional<ComplexEnvelope> noise;
};

// Received band fields of trial k on an n-sample record.
Fields make_fields(const ScenarioConfig& cfg, std::size_t n, std::size_t k, bool with_probe, bool with_noise,
                   bool modulate) {
  const double dt = cfg.grid.dt;
  const double duration = dt * static_cast<double>(n);
  const double sigma = cfg.source.sigma();
  const double nu = cfg.source.carrier_frequency();
  const std::uint64_t seed = member_seed(cfg.seed, k);
  Fields f;
  // Unit-flux pair so the reference exists even with the probe switched off.
  auto pair = run_stage("source", [&] {
    return synthesize_chaotic_pair(CorrelationSpec{1.0, sigma}, cfg.source.reference_flux(), duration, dt, seed);
  });
  f.probe_rx = run_stage("target", [&] {
    TargetModel t = cfg.target;
    if (!modulate) {
      t.doppler_shift = 0.0;
      t.vibration_rms = 0.0;
    }
    auto p = pair.probe;
    const double a = with_probe ? std::sqrt(cfg.source.probe_flux) : 0.0;
    for (auto& v : p.samples) v *= a;
    p = apply_target(p, t, seed, nu);
    if (cfg.dispersion.ps_per_nm != 0.0) {
      p = apply_dispersion(p, cfg.dispersion.ps_per_nm, cfg.source.center_wavelength);
      if (cfg.dispersion.compensated) p = apply_dispersion(p, -cfg.dispersion.ps_per_nm, cfg.source.center_wavelength);
    }
    return p;
  });
  f.reference = run_stage("reference", [&] {
    auto r = delay_envelope(pair.reference, cfg.reference_delay, nu);
    if (modulate && cfg.reference_delay_rate != 0.0) {
      const double shift = -nu * cfg.reference_delay_rate;
      for (std::size_t j = 0; j < n; ++j) r.samples[j] *= std::polar(1.0, 2.0 * kPi * shift * static_cast<double>(j) * dt);
    }
    return r;
  });
  if (with_noise && cfg.noise_flux > 0.0)
    f.noise = run_stage("noise", [&] { return synthesize_noise({cfg.noise_flux, sigma}, duration, dt, seed); });
  return f;
}

struct OpticalTrial {
  MemberMoments moments;
  double density = 0.0;  // two-sided i-SFG PSD near DC
  double probe_flux = 0.0;
  double drift = 0.0;
  std::size_t z_steps = 0;
};

// Propagates and filters trial k; the filtered SFG is handed to sink.
template <class Sink>
OpticalTrial run_trial(const ScenarioConfig& cfg, std::size_t n, std::size_t k, bool with_probe, bool with_noise,
                       bool modulate, Sink&& sink) {
  const auto f = make_fields(cfg, n, k, with_probe, with_noise, modulate);
  OpticalTrial t;
  t.probe_flux = f.probe_rx.mean_flux();
  const auto res = run_stage("propagation", [&] {
    return solve_three_wave(f.probe_rx, f.reference, f.noise ? &*f.noise : nullptr, cfg.wg, cfg.solver);
  });
  t.drift = res.manley_rowe_drift;
  t.z_steps = res.z_steps;
  auto sfg = run_stage("bandpass", [&] {
    return apply_bandpass(res.sfg_out, cfg.det.optical_bandpass.center, cfg.det.optical_bandpass.width);
  });
  t.moments = member_moments(sfg);

  // i-SFG density from the first few bins either side of DC, divided by the
  // known walk-off and source roll-off so all bins estimate the DC value.
  auto spec = sfg.samples;
  fft::forward(spec);
  const double df = sfg.frequency_spacing();
  const double sigma = cfg.source.sigma();
  const double tw = cfg.wg.walkoff_window();
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t m = 1; m <= 4 && m < n / 2; ++m) {
    for (std::size_t slot : {m, n - m}) {
      const double fr = static_cast<double>(signed_bin(slot, n)) * df;
      const double x = kPi * fr * tw;
      const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
      const double transfer = sinc * sinc * std::exp(-fr * fr / (4.0 * sigma * sigma));
      acc += std::norm(spec[slot]) * sfg.dt / static_cast<double>(n) / transfer;
      ++used;
    }
  }
  t.density = used ? acc / static_cast<double>(used) : 0.0;
  sink(std::move(sfg));
  return t;
}

struct LineWindow {
  double search, inner, outer, smoothing;
};

LineWindow line_window(const ScenarioConfig& cfg, double bin) {
  const bool vib = cfg.target.vibration_rms > 0.0 && cfg.target.vibration_bandwidth > 0.0;
  const double w = std::max(2.0 * bin, vib ? 2.0 * cfg.target.vibration_bandwidth : 0.0);
  return {w, 10.0 * w, 30.0 * w, vib ? cfg.target.vibration_bandwidth / 10.0 : 0.0};
}

double received_nominal(const ScenarioConfig& cfg) { return cfg.target.reflectivity * cfg.source.probe_flux; }

void finish_summary(const ScenarioConfig& cfg, LinkSummary& s, double rbw) {
  const double pn = cfg.noise_flux;
  const double pp = s.received_probe_flux;
  s.noise_flux = pn;
  s.dd_snr = pp + pn > 0.0 ? pp / (pp + pn) : 0.0;
  s.c_sfg_efficiency = pp > 0.0 ? s.c_sfg_flux / pp : 0.0;
  s.snr = s.line.snr;
  s.peak_detected = s.line.detected();
  s.enhancement_db = s.optical_snr > 0.0 && s.dd_snr > 0.0 ? units::to_db(s.optical_snr / s.dd_snr)
                                                          : std::numeric_limits<double>::quiet_NaN();
  s.predicted_enhancement_db = units::to_db(2.0 * std::sqrt(kPi) * cfg.source.sigma() / rbw);
}

LinkResult run_direct(const ScenarioConfig& cfg, std::size_t n) {
  const std::size_t trials = cfg.n_trials;
  const double rbw = cfg.det.electrical_rbw;
  std::vector<OpticalTrial> opt(trials);
  std::vector<SpectrumEstimate> optical(trials), esa(trials);
  HomodyneTrace first;
  parallel_for(trials, [&](std::size_t k) {
    opt[k] = run_trial(cfg, n, k, true, true, true, [&](ComplexEnvelope sfg) {
      const ComplexEnvelope one[1] = {sfg};
      optical[k] = estimate_psd(one, rbw);
      auto shifted = run_stage("serrodyne", [&] {
        return serrodyne_shift(sfg, cfg.det.serrodyne_shift, cfg.det.serrodyne);
      });
      auto tr = run_stage("homodyne", [&] {
        return balanced_homodyne(shifted, {}, cfg.det, member_seed(cfg.seed, k));
      });
      esa[k] = run_stage("esa", [&] { return esa_spectrum(tr, rbw); });
      if (k == 0) first = std::move(tr);
    });
  });

  LinkResult out;
  out.trace = std::move(first);
  out.esa = average_spectra(esa);
  auto& s = out.summary;
  s.mode = to_string(LinkMode::direct);
  s.n_trials = trials;
  std::vector<MemberMoments> moments;
  for (const auto& t : opt) {
    moments.push_back(t.moments);
    s.received_probe_flux += t.probe_flux / static_cast<double>(trials);
    s.manley_rowe_drift = std::max(s.manley_rowe_drift, t.drift);
    s.z_steps_max = std::max(s.z_steps_max, t.z_steps);
  }
  const auto d = decompose_moments(moments, static_cast<double>(n));
  s.c_sfg_flux = d.coherent_flux;
  s.c_sfg_flux_se = d.coherent_se;
  s.i_sfg_flux = d.incoherent_flux;

  const double f_opt = cfg.target.doppler_shift - cfg.source.carrier_frequency() * cfg.reference_delay_rate;
  const auto opt_spec = average_spectra(optical);
  const double ob = opt_spec.bin_width;
  const auto ol = measure_line(opt_spec, f_opt, 1.5 * ob, 4.0 * ob, 12.0 * ob);
  s.optical_snr = ol.snr;
  s.i_sfg_density = ol.floor_power / opt_spec.resolution_bandwidth;

  s.line_frequency = cfg.det.serrodyne_shift + f_opt;
  const auto w = line_window(cfg, out.esa.bin_width);
  s.line = measure_line(out.esa, s.line_frequency, w.search, w.inner, w.outer, w.smoothing);
  finish_summary(cfg, s, out.esa.resolution_bandwidth);
  return out;
}

struct StageA {
  cplx amplitude;  // mean c-SFG field
  CoherentDecomposition probe;
  double density = 0.0;
  double noise_incoherent = 0.0;
  double probe_flux = 0.0;
  double drift = 0.0;
  std::size_t z_steps = 0;
};

StageA run_stage_a(const ScenarioConfig& cfg) {
  const std::size_t trials = cfg.n_trials;
  const std::size_t n = cfg.grid.n_samples;
  StageA a;
  auto sweep = [&](bool probe, bool noise, std::vector<OpticalTrial>& out) {
    out.resize(trials);
    parallel_for(trials, [&](std::size_t k) { out[k] = run_trial(cfg, n, k, probe, noise, false, [](ComplexEnvelope) {}); });
    for (const auto& t : out) {
      a.drift = std::max(a.drift, t.drift);
      a.z_steps = std::max(a.z_steps, t.z_steps);
    }
  };
  std::vector<OpticalTrial> pt, nt;
  // Probe and noise SFG add linearly below depletion, so each is run alone:
  // the probe run pins the c-SFG amplitude without noise-driven scatter.
  sweep(true, false, pt);
  std::vector<MemberMoments> m;
  KahanSum dens, flux;
  for (const auto& t : pt) {
    m.push_back(t.moments);
    dens.add(t.density);
    flux.add(t.probe_flux);
  }
  a.probe = decompose_moments(m, static_cast<double>(n));
  KahanSum re, im;
  for (const auto& x : m) {
    re.add(x.mean.real());
    im.add(x.mean.imag());
  }
  a.amplitude = {re.value() / static_cast<double>(trials), im.value() / static_cast<double>(trials)};
  a.density = dens.value() / static_cast<double>(trials);
  a.probe_flux = flux.value() / static_cast<double>(trials);
  if (cfg.noise_flux > 0.0) {
    sweep(false, true, nt);
    KahanSum nd, ni;
    for (const auto& t : nt) {
      nd.add(t.density);
      ni.add(t.moments.power);
    }
    a.density += nd.value() / static_cast<double>(trials);
    a.noise_incoherent = ni.value() / static_cast<double>(trials);
  }
  return a;
}

LinkResult run_two_scale(const ScenarioConfig& cfg) {
  const StageA a = run_stage_a(cfg);

  const double fs = cfg.electrical.sample_rate;
  const double dt = 1.0 / fs;
  const double rbw = cfg.det.electrical_rbw;
  const auto nseg = static_cast<std::size_t>(std::llround(1.5 * fs / rbw));
  const std::size_t n = nseg * (cfg.electrical.segments + 1) / 2;
  const double f_d = cfg.target.doppler_shift - cfg.source.carrier_frequency() * cfg.reference_delay_rate;
  const double noise_sd = std::sqrt(a.density * fs);

  LinkResult out;
  std::vector<SpectrumEstimate> esa(cfg.electrical.records);
  for (std::size_t r = 0; r < cfg.electrical.records; ++r) {
    const std::uint64_t seed = member_seed(cfg.seed, r);
    ComplexEnvelope field = ComplexEnvelope::zeros(n, dt);
    run_stage("electrical", [&] {
      Rng vib(seed, Stream::vibration);
      const auto phi = vibration_phase(n, dt, cfg.target.vibration_rms, cfg.target.vibration_bandwidth, vib);
      Rng rng(seed, Stream::electrical);
      for (std::size_t j = 0; j < n; ++j) {
        const double ph = phi[j] + 2.0 * kPi * f_d * static_cast<double>(j) * dt;
        field.samples[j] = a.amplitude * std::polar(1.0, ph) + noise_sd * rng.circular_normal();
      }
      return 0;
    });
    field = run_stage("serrodyne", [&] { return serrodyne_shift(field, cfg.det.serrodyne_shift, cfg.det.serrodyne); });
    auto tr = run_stage("homodyne", [&] { return balanced_homodyne(field, {}, cfg.det, seed); });
    esa[r] = run_stage("esa", [&] { return esa_spectrum(tr, rbw); });
    if (r == 0) out.trace = std::move(tr);
  }
  out.esa = average_spectra(esa);

  auto& s = out.summary;
  s.mode = to_string(LinkMode::two_scale);
  s.n_trials = cfg.n_trials;
  s.received_probe_flux = a.probe_flux;
  s.c_sfg_flux = a.probe.coherent_flux;
  s.c_sfg_flux_se = a.probe.coherent_se;
  s.i_sfg_flux = a.probe.incoherent_flux + a.noise_incoherent;
  s.i_sfg_density = a.density;
  s.manley_rowe_drift = a.drift;
  s.z_steps_max = a.z_steps;
  s.optical_snr = a.density > 0.0 ? s.c_sfg_flux / (a.density * out.esa.resolution_bandwidth)
                                  : std::numeric_limits<double>::infinity();
  s.line_frequency = cfg.det.serrodyne_shift + f_d;
  const auto w = line_window(cfg, out.esa.bin_width);
  s.line = measure_line(out.esa, s.line_frequency, w.search, w.inner, w.outer, w.smoothing);
  finish_summary(cfg, s, out.esa.resolution_bandwidth);
  return out;
}

}  // namespace

LinkResult simulate_link(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto nseg = static_cast<std::size_t>(std::llround(1.5 / (cfg.det.electrical_rbw * cfg.grid.dt)));
  const std::size_t need = std::max(cfg.grid.n_samples, nseg * (cfg.electrical.segments + 1) / 2);
  LinkMode mode = cfg.mode;
  if (mode == LinkMode::automatic) mode = need <= kDirectModeMaxSamples ? LinkMode::direct : LinkMode::two_scale;
  if (mode == LinkMode::direct) return run_direct(cfg, need);
  return run_two_scale(cfg);
}

double ranging_fwhm(double sigma) { return units::kFwhmPerSigma / (2.0 * kPi * sigma); }

RangingProfile range_scan(const ScenarioConfig& cfg, std::span<const double> delays) {
  if (delays.size() < 4) throw InvalidArgument("range_scan: need at least 4 delays");
  const auto [lo, hi] = std::minmax_element(delays.begin(), delays.end());
  if (cfg.target.round_trip_delay < *lo || cfg.target.round_trip_delay > *hi)
    throw InvalidArgument("range_scan: delay list does not span the target delay");
  RangingProfile p;
  p.delays.assign(delays.begin(), delays.end());
  for (double d : delays) {
    ScenarioConfig c = cfg;
    c.reference_delay = d;
    const auto r = simulate_link(c);
    const double excess = std::max(r.summary.line.peak_power - r.summary.line.floor_power, 0.0);
    p.signal.push_back(std::sqrt(excess));
    const double f = r.summary.c_sfg_flux, fse = r.summary.c_sfg_flux_se;
    p.signal_se.push_back(f > 0.0 ? fse / (2.0 * std::sqrt(f)) : std::sqrt(fse));
    p.max_drift = std::max(p.max_drift, r.summary.manley_rowe_drift);
  }
  p.fitted_center = p.fitted_fwhm = std::numeric_limits<double>::quiet_NaN();
  const double top = *std::max_element(p.signal.begin(), p.signal.end());
  const double se = *std::max_element(p.signal_se.begin(), p.signal_se.end());
  if (!(top > 3.0 * se) || !(top > 0.0)) return p;
  auto fit = fit_gaussian(p.delays, p.signal);
  if (!fit || fit->center < *lo || fit->center > *hi || !(fit->sigma > 0.0)) return p;
  p.fit = fit;
  p.fitted_center = fit->center;
  p.fitted_fwhm = fit->fwhm();
  return p;
}

DirectDetectionResult direct_detection(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::size_t trials = cfg.n_trials;
  const std::size_t n = cfg.grid.n_samples;
  const double sigma = cfg.source.sigma();
  std::vector<ComplexEnvelope> probes(trials), noises(trials);
  std::vector<double> total(trials), blocked(trials);
  parallel_for(trials, [&](std::size_t k) {
    auto f = make_fields(cfg, n, k, true, true, true);
    probes[k] = f.probe_rx;
    noises[k] = f.noise ? *f.noise : ComplexEnvelope::zeros(n, cfg.grid.dt);
    ComplexEnvelope sum = probes[k];
    for (std::size_t j = 0; j < n; ++j) sum.samples[j] += noises[k].samples[j];
    total[k] = sum.mean_flux();
    // Target blocked: only the noise, from an independent realization.
    if (cfg.noise_flux > 0.0) {
      auto off = synthesize_noise({cfg.noise_flux, sigma}, cfg.grid.duration(), cfg.grid.dt,
                                  member_seed(cfg.seed, trials + k));
      blocked[k] = off.mean_flux();
    }
  });
  DirectDetectionResult r;
  const auto tot = mean_and_se(total);
  const auto off = mean_and_se(blocked);
  std::vector<double> pf(trials);
  for (std::size_t k = 0; k < trials; ++k) pf[k] = probes[k].mean_flux();
  r.probe_flux = mean_and_se(pf).mean;
  r.noise_flux = cfg.noise_flux;
  r.snr_measured = tot.mean > 0.0 ? (tot.mean - off.mean) / tot.mean : 0.0;
  const double nominal = cfg.target.taps.empty() ? received_nominal(cfg) : r.probe_flux;
  r.snr_expected = nominal + cfg.noise_flux > 0.0 ? nominal / (nominal + cfg.noise_flux) : 0.0;
  if (cfg.noise_flux > 0.0 && r.probe_flux > 0.0) {
    const double rbw = 1.5 * 8.0 / cfg.grid.duration();
    r.probe_vs_noise = psd_two_sample_test(probes, noises, rbw, 3.0 * sigma, 12);
  }
  return r;
}

}  // namespace chaosqfc
