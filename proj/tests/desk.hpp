#pragma once
// Desk-scale scenario: a 1 GHz-class source with the full-scale dimensionless
// waveguide (sigma T_w and gamma sqrt(P_r) L), small enough to run quickly.

#include <algorithm>
#include <cmath>

#include "chaosqfc/propagation.hpp"
#include "chaosqfc/scenario.hpp"
#include "chaosqfc/units.hpp"

namespace desk {

inline chaosqfc::ScenarioConfig scenario(double sigma, double rbw, double samples_per_window = 48.0) {
  using namespace chaosqfc;
  ScenarioConfig c;
  c.source.center_wavelength = 1560e-9;
  c.source.fwhm_wavelength = units::kFwhmPerSigma * sigma * 1560e-9 * 1560e-9 / units::kSpeedOfLight;
  c.source.probe_flux = 1e10;
  c.source.reference_power = 0.26;
  const double tw = 5.885 / sigma;
  c.wg.length = 0.05;
  c.wg.delta_beta = tw / c.wg.length;
  c.wg.gamma = gamma_for_angle(units::kPi / 2.0, c.source.reference_flux(), c.wg.length);
  c.wg.n_z_steps = 64;
  c.grid.dt = tw / samples_per_window;
  c.grid.n_samples = 4096;
  c.det.optical_bandpass = {0.0, 0.15 * sigma};
  c.det.electrical_rbw = rbw;
  c.det.integration_time = 10.0 / rbw;
  // keep the shift well inside the optical grid's Nyquist/4
  c.det.serrodyne_shift = std::min(200.0 * rbw, 0.05 / c.grid.dt);
  c.det.lo_flux = 1e15;
  c.electrical.sample_rate = 20.0 * c.det.serrodyne_shift;
  c.n_trials = 8;
  c.seed = 99;
  return c;
}

}  // namespace desk
