#include "chaosqfc/defaults.hpp"

#include "chaosqfc/units.hpp"

namespace chaosqfc {

RunConfig default_config() {
  RunConfig c;
  auto& s = c.scenario;
  s.source.center_wavelength = 1560e-9;
  s.source.fwhm_wavelength = 7.5e-9;
  s.source.probe_flux = 1e10;
  s.source.reference_power = 0.26;
  s.noise_flux = 0.0;

  s.wg.length = 0.05;
  s.wg.delta_beta = 0.09 / units::kSpeedOfLight;
  // Full conversion of a single-frequency probe at 0.26 W of reference.
  s.wg.gamma = gamma_for_angle(units::kPi / 2.0, units::watts_to_flux(0.26, 1560e-9), s.wg.length);
  s.wg.n_z_steps = 256;

  // SFG sits at 780 nm; the grating is 0.12 nm wide there.
  s.det.optical_bandpass = {0.0, units::wavelength_span_to_hz(0.12e-9, 780e-9)};
  s.det.serrodyne_shift = 2.1e6;
  s.det.electrical_rbw = 10.0;
  s.det.integration_time = 0.1;
  s.det.lo_flux = 1e15;
  s.det.shot_noise = true;

  s.grid.dt = s.wg.walkoff_window() / 96.0;
  s.grid.n_samples = 4096;
  s.electrical.sample_rate = 20e6;
  s.electrical.segments = 3;
  s.electrical.records = 2;
  s.mode = LinkMode::automatic;
  s.n_trials = 16;
  s.seed = 20240607;
  return c;
}

}  // namespace chaosqfc
