#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "chaosqfc/detection.hpp"
#include "chaosqfc/errors.hpp"
#include "chaosqfc/fft.hpp"
#include "chaosqfc/propagation.hpp"
#include "chaosqfc/random.hpp"
#include "chaosqfc/source.hpp"
#include "chaosqfc/stats.hpp"
#include "chaosqfc/units.hpp"
#include "oracles.hpp"

using namespace chaosqfc;

namespace {

ComplexEnvelope tone(std::size_t n, double dt, double flux, double f, double phase = 0.0) {
  ComplexEnvelope e = ComplexEnvelope::zeros(n, dt);
  for (std::size_t j = 0; j < n; ++j) e.samples[j] = std::sqrt(flux) * std::polar(1.0, 2 * oracle::pi * f * j * dt + phase);
  return e;
}

// Harmonic m of exp(i phi(t)) over one period, phi the L-level staircase, by brute force.
cplx staircase_harmonic(unsigned levels, int m) {
  const int samples = 20000 * static_cast<int>(levels);
  cplx s{};
  for (int j = 0; j < samples; ++j) {
    const double t = (j + 0.5) / samples;
    const double q = std::floor(t * levels);
    const double phi = 2 * oracle::pi * q / (levels - 1.0);
    s += std::polar(1.0, phi - 2 * oracle::pi * m * t);
  }
  return s / double(samples);
}

DetectionSpec quiet_det() {
  DetectionSpec d;
  d.lo_flux = 1e15;
  d.electrical_rbw = 10;
  d.integration_time = 0.1;
  d.optical_bandpass = {0.0, 1e9};
  d.shot_noise = false;
  return d;
}

}  // namespace

TEST_CASE("111 dB worked number") {
  const double sigma = units::fwhm_to_sigma(units::wavelength_span_to_hz(7.5e-9, 1560e-9));
  const auto f = snr_formulas(1.0, 1.0, sigma, 10.0);
  CHECK(f.enhancement_db == doctest::Approx(oracle::enhancement_db(sigma, 10.0)));
  CHECK(std::abs(f.enhancement_db - 111.0) <= 1.0);
  // 1/BW law: two decades of bandwidth are 20 dB
  CHECK(snr_formulas(1.0, 1.0, sigma, 1e3).enhancement_db == doctest::Approx(f.enhancement_db - 20.0));
}

TEST_CASE("snr formulas") {
  const double pp = 2.0, pn = 50.0, s = 1e9, bw = 1e3;
  const auto f = snr_formulas(pp, pn, s, bw);
  const double g = 2 * std::sqrt(oracle::pi) * s / bw;
  CHECK(f.snr_dd == doctest::Approx(pp / (pn + pp)));
  CHECK(f.snr_qfc == doctest::Approx(g * 2 * pp / (2 * pn + pp)));
  CHECK(f.snr_qfc_gaussian == doctest::Approx(g * pp / (pn + pp)));
}

TEST_CASE("coherent decomposition") {
  const std::size_t n = 1024;
  const double dt = 1e-10;
  std::vector<ComplexEnvelope> ens;
  for (std::size_t k = 0; k < 200; ++k) {
    auto e = tone(n, dt, 4.0, 0.0, 0.3);
    auto noise = synthesize_noise({9.0, 1e9}, n * dt, dt, k);
    for (std::size_t j = 0; j < n; ++j) e.samples[j] += noise.samples[j];
    ens.push_back(e);
  }
  const auto d = decompose_coherent(ens);
  CHECK(d.coherent_flux == doctest::Approx(4.0).epsilon(0.03));
  CHECK(d.incoherent_flux == doctest::Approx(9.0).epsilon(0.03));
  CHECK(d.coherent_fraction == doctest::Approx(d.coherent_flux / (d.coherent_flux + d.incoherent_flux)));
  CHECK(d.coherent_se > 0.0);

  // pure noise: the bias correction leaves no coherent flux beyond its error
  std::vector<ComplexEnvelope> noise;
  for (std::size_t k = 0; k < 200; ++k) noise.push_back(synthesize_noise({9.0, 1e9}, n * dt, dt, 500 + k));
  const auto z = decompose_coherent(noise);
  CHECK(z.coherent_flux <= 4.0 * z.coherent_se + 1e-3);
  CHECK(z.coherent_fraction >= 0.0);
  CHECK(z.coherent_fraction <= 1.0);

  // a tone off DC is picked up when demodulated
  std::vector<ComplexEnvelope> shifted;
  for (std::size_t k = 0; k < 4; ++k) shifted.push_back(tone(n, dt, 2.0, 5.0 / (n * dt)));
  CHECK(decompose_coherent(shifted, 5.0 / (n * dt)).coherent_flux == doctest::Approx(2.0));
  CHECK(decompose_coherent(shifted).coherent_flux < 1e-20);
}

TEST_CASE("analytic SFG spectrum against an independent integral") {
  WaveguideSpec wg;
  wg.length = 0.05;
  wg.delta_beta = 0.09 / oracle::c0;
  wg.gamma = 1e-8;
  const double s = 3.9e11, pp = 1e6, pr = 1e18, pn = 3e6;
  const double gl = wg.gamma * wg.length, tw = wg.delta_beta * wg.length;
  const double want = oracle::simpson([&](double f) { return oracle::isfg_psd(f, gl, pp, pr, pn, s, tw); },
                                      -14 * s, 14 * s, 20000);
  CHECK(analytic_isfg_power(pp, pr, pn, s, wg) == doctest::Approx(want).epsilon(1e-6));

  const std::size_t n = 4096;
  const double dt = tw / 96;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = (double(i) - double(n / 2)) / (n * dt);
  const auto a = analytic_sfg_psd(pp, pr, pn, s, wg, f);
  const double df = 1.0 / (n * dt);
  // delta weight sits in the DC bin on top of the background
  const double bg0 = oracle::isfg_psd(0.0, gl, pp, pr, pn, s, tw);
  CHECK((a.psd[n / 2] - bg0) * df == doctest::Approx(gl * gl * pp * pr).epsilon(1e-9));
  CHECK(a.psd[n / 2 + 100] == doctest::Approx(oracle::isfg_psd(f[n / 2 + 100], gl, pp, pr, pn, s, tw)));
}

TEST_CASE("rectangular bandpass") {
  const std::size_t n = 4096;
  const double dt = 1e-3;
  auto e = tone(n, dt, 1.0, 10.0 / (n * dt));
  const auto off = tone(n, dt, 1.0, 300.0 / (n * dt));
  for (std::size_t j = 0; j < n; ++j) e.samples[j] += off.samples[j];
  const auto f = apply_bandpass(e, 0.0, 100.0 / (n * dt));
  CHECK(f.mean_flux() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(apply_bandpass(e, 0.0, 0.5 / (n * dt)), InvalidArgument);
  CHECK_THROWS_AS(apply_bandpass(e, 400.0, 300.0), InvalidArgument);

  // white noise keeps the band fraction
  ComplexEnvelope w = ComplexEnvelope::zeros(n, dt);
  Rng rng(1, Stream::noise);
  for (auto& v : w.samples) v = rng.circular_normal();
  CHECK(apply_bandpass(w, 0.0, 0.25 / dt).mean_flux() / w.mean_flux() == doctest::Approx(0.25).epsilon(0.05));
  // 0.12 nm of a 3.7 nm background
  CHECK(bandpass_transmission(0.12e-9, 3.7e-9) == doctest::Approx(0.12 / 3.7));
  CHECK(bandpass_transmission(5.0, 3.0) == 1.0);
}

TEST_CASE("serrodyne shift moves a tone") {
  const std::size_t n = 4096;
  const double dt = 1.0;
  const double fs = 1.0 / 64.0;
  const auto dc = tone(n, dt, 1.0, 0.0);
  auto out = serrodyne_shift(dc, fs);
  auto spec = out.samples;
  fft::forward(spec);
  const std::size_t k = std::size_t(fs * n);
  CHECK(std::norm(spec[k]) / double(n * n) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::norm(spec[0]) / double(n * n) < 1e-20);
  CHECK_THROWS_AS(serrodyne_shift(dc, 0.2), InvalidArgument);
}

TEST_CASE("staircase serrodyne leaves a residual carrier") {
  for (unsigned L : {4u, 8u, 16u}) {
    const cplx c0 = staircase_harmonic(L, 0), c1 = staircase_harmonic(L, 1);
    const double want = 10 * std::log10(std::norm(c1) / std::norm(c0));
    CHECK(serrodyne_carrier_suppression_db(L) == doctest::Approx(want).epsilon(1e-4));
  }
  CHECK(std::isinf(serrodyne_carrier_suppression_db(0)));
  // sampled staircase on the grid, 512 samples per period
  const std::size_t n = 1 << 15;
  const auto out = serrodyne_shift(tone(n, 1.0, 1.0, 0.0), 1.0 / 512, {8});
  auto spec = out.samples;
  fft::forward(spec);
  const double got = 10 * std::log10(std::norm(spec[n / 512]) / std::norm(spec[0]));
  CHECK(got == doctest::Approx(serrodyne_carrier_suppression_db(8)).epsilon(0.02));
}

TEST_CASE("homodyne: shot-noise floor and tone calibration") {
  const std::size_t n = 1 << 17;
  const double dt = 1e-6;
  DetectionSpec det = quiet_det();
  det.shot_noise = true;
  const auto blank = balanced_homodyne(ComplexEnvelope::zeros(n, dt), {}, det, 3);
  const auto s = esa_spectrum(blank, 100.0);
  const auto m = mean_and_se(s.psd);
  CHECK(m.mean == doctest::Approx(1.0).epsilon(0.02));

  const double flux = 5000.0, f0 = 123e3;
  const auto tr = balanced_homodyne(tone(n, dt, flux, f0), {}, quiet_det(), 4);
  const auto st = esa_spectrum(tr, 100.0);
  CHECK(st.band_power(f0 - 1e3, f0 + 1e3) == doctest::Approx(flux).epsilon(1e-3));
  const auto noisy = esa_spectrum(balanced_homodyne(tone(n, dt, flux, f0), {}, det, 4), 100.0);
  const auto peak = std::max_element(noisy.psd.begin(), noisy.psd.end());
  CHECK(noisy.frequencies[std::size_t(peak - noisy.psd.begin())] == doctest::Approx(f0).epsilon(1e-3));

  CHECK_THROWS_AS(balanced_homodyne(tone(n, dt, 1e14, 0.0), {}, det, 1), InvalidArgument);
  CHECK_THROWS_AS(esa_spectrum(blank, 0.5 / (n * dt)), InvalidArgument);
}

TEST_CASE("homodyne: common phase noise cancels") {
  const std::size_t n = 4096;
  const double dt = 1e-6;
  const auto det = quiet_det();
  auto sig = tone(n, dt, 10.0, 20e3);
  std::vector<double> phi(n);
  Rng rng(8, Stream::lo_phase);
  double acc = 0;
  for (auto& p : phi) p = acc += 0.3 * rng.normal();
  auto noisy = sig;
  for (std::size_t j = 0; j < n; ++j) noisy.samples[j] *= std::polar(1.0, phi[j]);
  const auto a = balanced_homodyne(sig, {}, det, 1);
  const auto b = balanced_homodyne(noisy, phi, det, 1);
  for (std::size_t j = 0; j < n; ++j) CHECK(b.rf_samples[j] == doctest::Approx(a.rf_samples[j]).epsilon(1e-9).scale(10));
  // the uncompensated trace is broadened
  const auto c = balanced_homodyne(noisy, {}, det, 1);
  double diff = 0;
  for (std::size_t j = 0; j < n; ++j) diff += std::abs(c.rf_samples[j] - a.rf_samples[j]);
  CHECK(diff / n > 0.5);
}

TEST_CASE("line measurement on a synthetic spectrum") {
  SpectrumEstimate s;
  s.resolution_bandwidth = 10.0;
  s.bin_width = 5.0;
  for (int i = 0; i < 4000; ++i) {
    const double f = i * 5.0;
    s.frequencies.push_back(f);
    const double sd = 500.0 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    s.psd.push_back(1.0 + 1000.0 * std::exp(-(f - 10e3) * (f - 10e3) / (2 * sd * sd)));
  }
  const auto m = measure_line(s, 10e3, 100.0, 3e3, 8e3);
  CHECK(m.frequency == doctest::Approx(10e3));
  CHECK(m.peak_power == doctest::Approx(1001.0 * 10.0));
  CHECK(m.floor_power == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(m.snr == doctest::Approx(1000.0).epsilon(1e-6));
  CHECK(m.fwhm == doctest::Approx(500.0).epsilon(0.03));  // bin-limited
  CHECK(m.detected());
}

TEST_CASE("detection spec invariants") {
  DetectionSpec d = quiet_det();
  CHECK_NOTHROW(d.validate());
  d.electrical_rbw = 1.0;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d = quiet_det();
  d.optical_bandpass.width = 5.0;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
}
