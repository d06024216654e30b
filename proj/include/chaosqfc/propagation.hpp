#pragma once

#include <cstddef>

#include "chaosqfc/envelope.hpp"

namespace chaosqfc {

struct WaveguideSpec {
  double gamma = 0.0;       // (photons/s)^-1/2 m^-1
  double length = 0.0;      // m
  double delta_beta = 0.0;  // s/m, SFG minus probe inverse group velocity
  std::size_t n_z_steps = 256;

  double walkoff_window() const noexcept { return delta_beta * length; }
  void validate() const;
  // Also checks that the walk-off window spans at least 4 samples.
  void validate_for_grid(double dt) const;
};

struct SolverOptions {
  double drift_tolerance = 1e-6;
  std::size_t max_z_steps = 1u << 14;
};

struct FluxRecord {
  double band = 0.0;  // probe + noise
  double reference = 0.0;
  double sfg = 0.0;
};

struct PropagationResult {
  ComplexEnvelope probe_out;  // the probe+noise band
  ComplexEnvelope reference_out;
  ComplexEnvelope sfg_out;
  FluxRecord flux_in;
  FluxRecord flux_out;
  double manley_rowe_drift = 0.0;  // max relative drift over z
  std::size_t z_steps = 0;
};

// Undepleted closed form: i gamma L sinc(pi f dBL) applied to band*reference.
// The window is centered, matching solve_three_wave's output frame.
ComplexEnvelope sfg_small_signal(const ComplexEnvelope& input_band, const ComplexEnvelope& reference,
                                 const WaveguideSpec& wg);

// Strang split-step: walk-off on the SFG field in the Fourier domain, RK4 on
// the three-wave products sample by sample. The step count doubles until the
// Manley-Rowe drift is within tolerance. noise may be null.
PropagationResult solve_three_wave(const ComplexEnvelope& probe, const ComplexEnvelope& reference,
                                   const ComplexEnvelope* noise, const WaveguideSpec& wg,
                                   const SolverOptions& opts = {});

// Single attempt at a fixed step count, no refinement.
PropagationResult integrate_three_wave(const ComplexEnvelope& band, const ComplexEnvelope& reference,
                                       const WaveguideSpec& wg, std::size_t z_steps);

// sin^2(theta) exp(-(2 pi sigma)^2 tau^2 / 2)
double analytic_cw_efficiency(double gamma_sqrt_pr_l, double delay, double sigma);

// gamma giving gamma sqrt(flux) L = theta
double gamma_for_angle(double theta, double reference_flux, double length);

}  // namespace chaosqfc
