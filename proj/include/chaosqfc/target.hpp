#pragma once

#include <cstdint>
#include <vector>

#include "chaosqfc/envelope.hpp"
#include "chaosqfc/random.hpp"

namespace chaosqfc {

// Extra echo relative to the main return.
struct Tap {
  double delay_offset = 0.0;  // s
  double amplitude = 0.0;     // field amplitude relative to the main return
};

struct TargetModel {
  double reflectivity = 1.0;
  double round_trip_delay = 0.0;  // s
  double doppler_shift = 0.0;     // Hz
  double vibration_rms = 0.0;     // rad
  // Linewidth (Hz) the vibration phase imprints on a pure tone. The OU corner
  // follows as bandwidth / (2 rms^2).
  double vibration_bandwidth = 0.0;
  std::vector<Tap> taps;
  void validate() const;
};

// Stationary Ornstein-Uhlenbeck phase with the given rms and linewidth.
std::vector<double> vibration_phase(std::size_t n, double dt, double rms, double linewidth, Rng& rng);

// Cyclic delay by tau via the spectrum, times the carrier phase
// exp(-i 2 pi carrier tau).
ComplexEnvelope delay_envelope(const ComplexEnvelope& env, double tau, double carrier_frequency);

ComplexEnvelope apply_target(const ComplexEnvelope& probe, const TargetModel& target, std::uint64_t seed,
                             double carrier_frequency = 0.0);

// Quadratic spectral phase pi D lambda^2 f^2 / c for D in ps/nm.
ComplexEnvelope apply_dispersion(const ComplexEnvelope& env, double dispersion_ps_per_nm, double center_wavelength);

}  // namespace chaosqfc
