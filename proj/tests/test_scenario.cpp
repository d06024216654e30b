#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "chaosqfc/errors.hpp"
#include "chaosqfc/fft.hpp"
#include "chaosqfc/parallel.hpp"
#include "chaosqfc/random.hpp"
#include "chaosqfc/scenario.hpp"
#include "chaosqfc/stats.hpp"
#include "chaosqfc/target.hpp"
#include "desk.hpp"
#include "oracles.hpp"

using namespace chaosqfc;

namespace {

bool has_issue(const std::vector<std::string>& issues, const std::string& field, const std::string& text = "") {
  return std::any_of(issues.begin(), issues.end(), [&](const std::string& s) {
    return s.rfind(field + ":", 0) == 0 && s.find(text) != std::string::npos;
  });
}

ComplexEnvelope pulse(std::size_t n, double dt, double center, double width) {
  ComplexEnvelope e = ComplexEnvelope::zeros(n, dt);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = j * dt - center;
    e.samples[j] = std::exp(-t * t / (2 * width * width));
  }
  return e;
}

}  // namespace

TEST_CASE("delay, reflectivity, taps and Doppler") {
  const std::size_t n = 512;
  const double dt = 1.0;
  const auto p = pulse(n, dt, 100.0, 6.0);
  const auto d = delay_envelope(p, 7.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(d.samples[j] - p.samples[(j + n - 7) % n]) < 1e-12);
  // carrier phase for a quarter cycle of delay
  const auto q = delay_envelope(p, 7.0, 0.25 / 7.0);
  CHECK(std::arg(q.samples[107]) == doctest::Approx(-oracle::pi / 2));

  TargetModel t;
  t.reflectivity = 0.25;
  t.round_trip_delay = 7.0;
  t.taps = {{20.0, 0.5}};
  const auto r = apply_target(p, t, 1);
  // amplitude sqrt(R) on the sum of the main return and the echo 20 samples later
  for (std::size_t j : {107u, 117u, 127u}) {
    const cplx want = 0.5 * (p.samples[j - 7] + 0.5 * p.samples[j - 27]);
    CHECK(std::abs(r.samples[j] - want) < 1e-12);
  }

  TargetModel dop;
  dop.doppler_shift = 10.0 / n;
  auto spec = apply_target(ComplexEnvelope({std::vector<cplx>(n, 1.0)}, dt), dop, 1).samples;
  fft::forward(spec);
  CHECK(std::abs(spec[10]) == doctest::Approx(double(n)));

  TargetModel bad;
  bad.reflectivity = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("vibration phase is an Ornstein-Uhlenbeck process") {
  const double rms = 4.0, lw = 1e3, dt = 1e-4;
  const std::size_t n = 1 << 20;
  Rng rng(5, Stream::vibration);
  const auto phi = vibration_phase(n, dt, rms, lw, rng);
  std::vector<double> v(phi.begin(), phi.end());
  const double var = variance(v);
  CHECK(var == doctest::Approx(rms * rms).epsilon(0.1));
  const double fc = lw / (2 * rms * rms);
  for (std::size_t lag : {1u, 10u}) {
    KahanSum s;
    for (std::size_t j = 0; j + lag < n; ++j) s.add(std::pow(phi[j + lag] - phi[j], 2));
    const double got = s.value() / double(n - lag);
    const double want = 2 * rms * rms * (1 - std::exp(-2 * oracle::pi * fc * lag * dt));
    CHECK(got == doctest::Approx(want).epsilon(0.03));
    // short lags diffuse like a Lorentzian of FWHM lw
    if (lag == 1) CHECK(got == doctest::Approx(2 * oracle::pi * lw * lag * dt).epsilon(0.03));
  }
}

TEST_CASE("dispersion round trip and spreading") {
  const std::size_t n = 4096;
  const double dt = 1e-13;
  const auto p = pulse(n, dt, n * dt / 2, 5e-13);
  const auto a = apply_dispersion(p, 1.0, 1560e-9);
  const auto b = apply_dispersion(a, -1.0, 1560e-9);
  double err = 0;
  for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(b.samples[j] - p.samples[j]));
  CHECK(err < 1e-12);
  double peak_a = 0, peak_p = 0;
  for (std::size_t j = 0; j < n; ++j) {
    peak_a = std::max(peak_a, std::abs(a.samples[j]));
    peak_p = std::max(peak_p, std::abs(p.samples[j]));
  }
  CHECK(peak_a < 0.9 * peak_p);
  CHECK(a.mean_flux() == doctest::Approx(p.mean_flux()));
  CHECK_THROWS_AS(apply_dispersion(p, 1e4, 1560e-9), InvalidArgument);
}

TEST_CASE("scenario check reports field paths") {
  auto c = desk::scenario(1e9, 1e7);
  CHECK(c.check().empty());
  c.source.probe_flux = -1;
  c.det.integration_time = 1e-8;
  c.target.round_trip_delay = 1.0;
  const auto issues = c.check();
  CHECK(has_issue(issues, "source.probe_flux", "flux"));
  CHECK(has_issue(issues, "det.rbw", "DetectionSpec invariant"));
  CHECK_THROWS_AS(c.validate(), ConfigError);
  auto d = desk::scenario(1e9, 1e7);
  d.target.round_trip_delay = d.grid.duration();
  CHECK(has_issue(d.check(), "target.delay"));
  d = desk::scenario(1e9, 1e7);
  d.grid.dt *= 2;
  CHECK(has_issue(d.check(), "grid.dt"));
}

TEST_CASE("direct-mode link: line, efficiency and determinism") {
  auto c = desk::scenario(1e9, 1e7);
  set_thread_count(1);
  const auto a = simulate_link(c);
  set_thread_count(3);
  const auto b = simulate_link(c);
  set_thread_count(0);
  CHECK(a.summary.mode == "direct");
  CHECK(a.esa.psd == b.esa.psd);
  CHECK(a.trace.rf_samples == b.trace.rf_samples);
  CHECK(a.summary.peak_detected);
  CHECK(a.summary.manley_rowe_drift <= 1e-6);
  CHECK(a.summary.line_frequency == doctest::Approx(c.det.serrodyne_shift));
  CHECK(std::abs(a.summary.line.frequency - c.det.serrodyne_shift) <= 2 * a.esa.bin_width);
  CHECK(a.summary.c_sfg_efficiency > 0.85);
  CHECK(a.summary.c_sfg_efficiency < 1.0);
  c.seed = 100;
  CHECK(simulate_link(c).esa.psd != a.esa.psd);
}

TEST_CASE("direct and two-scale modes agree on the c-SFG flux") {
  auto c = desk::scenario(1e9, 1e7);
  c.mode = LinkMode::two_scale;
  const auto t = simulate_link(c);
  c.mode = LinkMode::direct;
  const auto d = simulate_link(c);
  CHECK(t.summary.mode == "two_scale");
  CHECK(t.summary.peak_detected);
  CHECK(t.summary.c_sfg_flux == doctest::Approx(d.summary.c_sfg_flux).epsilon(0.03));
  CHECK(std::abs(t.summary.line.frequency - c.det.serrodyne_shift) <= 2 * t.esa.bin_width);
}

TEST_CASE("vibration and dispersion only degrade the line") {
  auto c = desk::scenario(1e9, 100.0);
  c.mode = LinkMode::two_scale;
  c.det.serrodyne_shift = 2e5;
  c.electrical.sample_rate = 4e6;
  c.target.vibration_bandwidth = 2e3;
  double last = 1e300;
  for (double rms : {0.0, 1.0, 4.0}) {
    c.target.vibration_rms = rms;
    const auto r = simulate_link(c);
    const double peak = r.summary.line.peak_power - r.summary.line.floor_power;
    CHECK(peak <= last * 1.001);
    last = peak;
  }

  auto d = desk::scenario(1e9, 1e7);
  d.dispersion.compensated = false;
  last = 1e300;
  const double base = simulate_link(d).summary.c_sfg_flux;
  // desk bandwidth needs a large D to matter
  for (double disp : {0.0, 1e4, 1e5}) {
    d.dispersion.ps_per_nm = disp;
    const double f = simulate_link(d).summary.c_sfg_flux;
    CHECK(f <= last * 1.001);
    last = f;
  }
  CHECK(last < 0.5 * base);
  d.dispersion.compensated = true;
  CHECK(simulate_link(d).summary.c_sfg_flux == doctest::Approx(base).epsilon(1e-6));
}

TEST_CASE("direct detection cannot tell probe from noise") {
  auto c = desk::scenario(1e9, 1e7);
  c.source.probe_flux = 1e10;
  c.noise_flux = 1e10;
  c.n_trials = 24;
  const auto r = direct_detection(c);
  CHECK(r.snr_expected == doctest::Approx(0.5));
  CHECK(r.snr_measured == doctest::Approx(r.snr_expected).epsilon(0.05));
  CHECK(r.probe_vs_noise.indistinguishable(0.95));
}

TEST_CASE("range scan finds the target delay") {
  auto c = desk::scenario(1e9, 1e7);
  c.target.round_trip_delay = 3 * c.grid.dt;
  const double fw = ranging_fwhm(c.source.sigma());
  std::vector<double> delays;
  for (int i = -10; i <= 10; ++i) delays.push_back(c.target.round_trip_delay + i * fw / 4);
  const auto p = range_scan(c, delays);
  REQUIRE(p.peak_detected());
  CHECK(std::abs(p.fitted_center - c.target.round_trip_delay) < c.grid.dt);
  CHECK(p.fitted_fwhm == doctest::Approx(fw).epsilon(0.08));
  CHECK(p.max_drift <= 1e-6);
  CHECK(ranging_fwhm(1e9) == doctest::Approx(2 * std::sqrt(2 * std::log(2.0)) / (2 * oracle::pi * 1e9)));
  const std::vector<double> bad = {1e-9, 2e-9, 3e-9, 4e-9};
  CHECK_THROWS_AS(range_scan(c, bad), InvalidArgument);
}
