#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "chaosqfc/detection.hpp"
#include "chaosqfc/efficiency.hpp"
#include "chaosqfc/errors.hpp"
#include "chaosqfc/propagation.hpp"
#include "chaosqfc/source.hpp"
#include "chaosqfc/stats.hpp"
#include "chaosqfc/target.hpp"
#include "oracles.hpp"

using namespace chaosqfc;

namespace {

// Desk-scale waveguide: sigma = 1 GHz, walk-off window 1 ns, 16 samples across it.
constexpr double kSigma = 1e9;
constexpr double kTw = 1e-9;
constexpr double kDt = kTw / 16.0;
constexpr std::size_t kN = 2048;
constexpr double kPr = 1e12;

WaveguideSpec desk_wg(double theta, double pr = kPr) {
  WaveguideSpec wg;
  wg.length = 0.05;
  wg.delta_beta = kTw / wg.length;
  wg.gamma = gamma_for_angle(theta, pr, wg.length);
  wg.n_z_steps = 64;
  return wg;
}

ComplexEnvelope constant(double flux, std::size_t n = 16, double dt = kDt) {
  ComplexEnvelope e = ComplexEnvelope::zeros(n, dt);
  for (auto& v : e.samples) v = std::sqrt(flux);
  return e;
}

double rms_diff(const ComplexEnvelope& a, const ComplexEnvelope& b) {
  double d = 0, s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    d += std::norm(a.samples[j] - b.samples[j]);
    s += std::norm(b.samples[j]);
  }
  return std::sqrt(d / s);
}

}  // namespace

TEST_CASE("analytic cw efficiency") {
  CHECK(analytic_cw_efficiency(oracle::pi / 2, 0.0, 1e9) == doctest::Approx(1.0));
  CHECK(analytic_cw_efficiency(oracle::pi / 4, 0.0, 1e9) == doctest::Approx(0.5));
  const double s = 2e9;
  CHECK(analytic_cw_efficiency(oracle::pi / 2, 1.0 / (2 * oracle::pi * s), s) == doctest::Approx(std::exp(-0.5)));
  const double g = gamma_for_angle(1.3, 4e18, 0.05);
  CHECK(g * std::sqrt(4e18) * 0.05 == doctest::Approx(1.3));
}

TEST_CASE("small-signal closed form") {
  const auto wg = desk_wg(0.3);
  const double gl = wg.gamma * wg.length;
  auto zero = sfg_small_signal(ComplexEnvelope::zeros(64, kDt), constant(kPr, 64), wg);
  for (const auto& v : zero.samples) CHECK(v == cplx(0.0));
  // constant inputs: flux gamma^2 L^2 Pp Pr exactly
  const auto out = sfg_small_signal(constant(3e6, 64), constant(kPr, 64), wg);
  CHECK(out.mean_flux() == doctest::Approx(gl * gl * 3e6 * kPr).epsilon(1e-12));
  CHECK_THROWS_AS(sfg_small_signal(constant(1.0, 64), constant(1.0, 32), wg), InvalidArgument);
}

TEST_CASE("cw limits of the full solver") {
  WaveguideSpec wg = desk_wg(oracle::pi / 2);
  wg.delta_beta = 0.0;
  const double pp = kPr * 1e-9;
  auto r = solve_three_wave(constant(pp), constant(kPr), nullptr, wg);
  CHECK(r.flux_out.sfg / pp == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.manley_rowe_drift <= 1e-6);
  wg.gamma = gamma_for_angle(oracle::pi, kPr, wg.length);
  r = solve_three_wave(constant(pp), constant(kPr), nullptr, wg);
  CHECK(r.flux_out.sfg / pp < 1e-6);
  // sin^2 across one period
  for (double theta : {0.2, 0.9, 1.4, 2.2, 3.0, 4.4, 5.9}) {
    wg.gamma = gamma_for_angle(theta, kPr, wg.length);
    r = solve_three_wave(constant(pp), constant(kPr), nullptr, wg);
    CHECK(std::abs(r.flux_out.sfg / pp - oracle::cw_efficiency(theta)) < 1e-5);
  }
}

TEST_CASE("nonlinear step converges at fourth order on cw inputs") {
  const auto wg = desk_wg(1.2);
  const auto p = constant(1e6), q = constant(kPr);
  const cplx ref = integrate_three_wave(p, q, wg, 4096).sfg_out.samples[0];
  const double e16 = std::abs(integrate_three_wave(p, q, wg, 4).sfg_out.samples[0] - ref);
  const double e32 = std::abs(integrate_three_wave(p, q, wg, 8).sfg_out.samples[0] - ref);
  const double e64 = std::abs(integrate_three_wave(p, q, wg, 16).sfg_out.samples[0] - ref);
  CHECK(e16 / e32 == doctest::Approx(16.0).epsilon(0.25));
  CHECK(e32 / e64 == doctest::Approx(16.0).epsilon(0.25));
}

TEST_CASE("Manley-Rowe conservation on chaotic inputs with noise") {
  const auto wg = desk_wg(oracle::pi / 2);
  const auto pair = synthesize_chaotic_pair({1e9, kSigma}, kPr, kN * kDt, kDt, 3);
  const auto noise = synthesize_noise({5e9, kSigma}, kN * kDt, kDt, 3);
  const auto r = solve_three_wave(pair.probe, pair.reference, &noise, wg);
  CHECK(r.manley_rowe_drift <= 1e-6);
  CHECK((r.flux_out.band + r.flux_out.sfg) / r.flux_in.band == doctest::Approx(1.0).epsilon(1e-6));
  CHECK((r.flux_out.reference + r.flux_out.sfg) / r.flux_in.reference == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.flux_out.sfg > 0.1 * r.flux_in.band);
  CHECK(r.z_steps >= wg.n_z_steps);
}

TEST_CASE("unreachable tolerance is a convergence failure") {
  const auto wg = desk_wg(oracle::pi / 2);
  const auto pair = synthesize_chaotic_pair({1e9, kSigma}, kPr, kN * kDt, kDt, 3);
  SolverOptions o;
  o.drift_tolerance = 1e-300;
  o.max_z_steps = 128;
  try {
    solve_three_wave(pair.probe, pair.reference, nullptr, wg, o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.drift() > 0.0);
  }
}

TEST_CASE("solver reduces to the small-signal form") {
  const auto wg = desk_wg(0.1);
  const auto pair = synthesize_chaotic_pair({1e6, kSigma}, kPr, kN * kDt, kDt, 21);
  const auto full = solve_three_wave(pair.probe, pair.reference, nullptr, wg);
  const auto small = sfg_small_signal(pair.probe, pair.reference, wg);
  CHECK(rms_diff(full.sfg_out, small) < 0.01);
}

TEST_CASE("global probe phase leaves the c-SFG power unchanged") {
  const auto wg = desk_wg(oracle::pi / 2);
  auto pair = synthesize_chaotic_pair({1e6, kSigma}, kPr, kN * kDt, kDt, 5);
  const auto a = solve_three_wave(pair.probe, pair.reference, nullptr, wg);
  for (auto& v : pair.probe.samples) v *= std::polar(1.0, 0.7);
  const auto b = solve_three_wave(pair.probe, pair.reference, nullptr, wg);
  const double pa = std::norm(mean_value(a.sfg_out.samples));
  const double pb = std::norm(mean_value(b.sfg_out.samples));
  CHECK(pb == doctest::Approx(pa).epsilon(1e-9));
}

TEST_CASE("c-SFG amplitude follows the delay envelope") {
  WaveguideSpec wg = desk_wg(0.05);
  wg.delta_beta = 4.0 * kDt / wg.length;  // short window, nearly flat transfer
  const double fwhm_field = 2.0 * std::sqrt(2.0 * std::log(2.0)) / (2 * oracle::pi * kSigma);
  std::vector<double> taus, amp;
  for (int i = -8; i <= 8; ++i) {
    const double tau = i * fwhm_field / 6.0;
    std::vector<ComplexEnvelope> out;
    for (std::size_t k = 0; k < 24; ++k) {
      const auto pair = synthesize_chaotic_pair({1e6, kSigma}, kPr, kN * kDt, kDt, 100 + k);
      out.push_back(sfg_small_signal(delay_envelope(pair.probe, tau, 0.0), pair.reference, wg));
    }
    taus.push_back(tau);
    amp.push_back(std::sqrt(std::max(decompose_coherent(out).coherent_flux, 0.0)));
  }
  const auto fit = fit_gaussian(taus, amp);
  REQUIRE(fit);
  CHECK(fit->fwhm() == doctest::Approx(fwhm_field).epsilon(0.05));
  CHECK(std::abs(fit->center) < kDt);
}

TEST_CASE("efficiency sweep invariants") {
  WaveguideSpec wg = desk_wg(oracle::pi / 2);
  const CorrelationSpec probe{1e6, kSigma};
  const SweepGrid grid{kDt, kN};
  const std::vector<double> fluxes = {0.0, 0.25 * kPr, kPr};
  const auto st = run_efficiency_sweep(probe, wg, fluxes, 30, 9, grid);
  REQUIRE(st.size() == 3);
  CHECK(st[0].total_sfg_efficiency.mean == doctest::Approx(0.0));
  CHECK(st[0].c_sfg_efficiency.mean == doctest::Approx(0.0));
  CHECK(st[2].baseline_efficiency == doctest::Approx(1.0).epsilon(1e-6));
  for (const auto& s : st) {
    CHECK(s.n_trials == 30);
    CHECK(s.max_drift <= 1e-6);
    CHECK(s.c_sfg_efficiency.mean >= -3 * s.c_sfg_efficiency.se);
    CHECK(s.c_sfg_efficiency.mean <= s.total_sfg_efficiency.mean + 3 * s.c_sfg_efficiency.se);
    CHECK(s.total_sfg_efficiency.mean <= 1.0 + 1e-9);
  }
  CHECK(st[2].total_sfg_efficiency.mean > st[1].total_sfg_efficiency.mean);
  // determinism
  const auto again = run_efficiency_sweep(probe, wg, fluxes, 30, 9, grid);
  CHECK(again[2].c_sfg_efficiency.mean == st[2].c_sfg_efficiency.mean);
  CHECK_THROWS_AS(run_efficiency_sweep(probe, wg, fluxes, 10, 9, grid), InvalidArgument);
}

TEST_CASE("waveguide invariants") {
  WaveguideSpec wg = desk_wg(1.0);
  CHECK_NOTHROW(wg.validate_for_grid(kDt));
  CHECK_THROWS_AS(wg.validate_for_grid(kTw / 3.0), InvalidArgument);
  wg.n_z_steps = 8;
  CHECK_THROWS_AS(wg.validate(), InvalidArgument);
  wg = desk_wg(1.0);
  wg.gamma = -1.0;
  CHECK_THROWS_AS(wg.validate(), InvalidArgument);
}
