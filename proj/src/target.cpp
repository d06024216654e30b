#include "chaosqfc/target.hpp"

#include <cmath>

#include "chaosqfc/errors.hpp"
#include "chaosqfc/fft.hpp"
#include "chaosqfc/units.hpp"

namespace chaosqfc {

using units::kPi;

void TargetModel::validate() const {
  if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) throw InvalidArgument("target.reflectivity: must lie in [0, 1]");
  if (!(vibration_bandwidth >= 0.0)) throw InvalidArgument("target.vibration_bandwidth: must be >= 0");
  if (!(vibration_rms >= 0.0)) throw InvalidArgument("target.vibration_rms: must be >= 0");
  if (!std::isfinite(round_trip_delay) || !std::isfinite(doppler_shift))
    throw InvalidArgument("target: delay and Doppler shift must be finite");
}

std::vector<double> vibration_phase(std::size_t n, double dt, double rms, double linewidth, Rng& rng) {
  std::vector<double> phi(n, 0.0);
  if (rms == 0.0 || linewidth == 0.0 || n == 0) return phi;
  const double corner = linewidth / (2.0 * rms * rms);
  const double a = std::exp(-2.0 * kPi * corner * dt);
  const double kick = rms * std::sqrt(1.0 - a * a);
  phi[0] = rms * rng.normal();
  for (std::size_t j = 1; j < n; ++j) phi[j] = a * phi[j - 1] + kick * rng.normal();
  return phi;
}

ComplexEnvelope delay_envelope(const ComplexEnvelope& env, double tau, double carrier_frequency) {
  ComplexEnvelope out = env;
  if (tau == 0.0) return out;
  const std::size_t n = env.size();
  fft::forward(out.samples);
  const auto f = fft_frequencies(n, env.dt);
  for (std::size_t k = 0; k < n; ++k) out.samples[k] *= std::polar(1.0, -2.0 * kPi * f[k] * tau);
  fft::inverse(out.samples);
  // Carrier phase, reduced first so large carriers keep their precision.
  const double cycles = carrier_frequency * tau;
  const cplx carrier = std::polar(1.0, -2.0 * kPi * (cycles - std::round(cycles)));
  for (auto& v : out.samples) v *= carrier;
  return out;
}

ComplexEnvelope apply_target(const ComplexEnvelope& probe, const TargetModel& target, std::uint64_t seed,
                             double carrier_frequency) {
  probe.validate();
  target.validate();
  ComplexEnvelope out = delay_envelope(probe, target.round_trip_delay, carrier_frequency);
  for (const auto& tap : target.taps) {
    const auto echo = delay_envelope(probe, target.round_trip_delay + tap.delay_offset, carrier_frequency);
    for (std::size_t j = 0; j < out.size(); ++j) out.samples[j] += tap.amplitude * echo.samples[j];
  }
  if (target.reflectivity != 1.0) {
    const double a = std::sqrt(target.reflectivity);
    for (auto& v : out.samples) v *= a;
  }
  if (target.doppler_shift != 0.0)
    for (std::size_t j = 0; j < out.size(); ++j)
      out.samples[j] *= std::polar(1.0, 2.0 * kPi * target.doppler_shift * static_cast<double>(j) * out.dt);
  if (target.vibration_rms > 0.0 && target.vibration_bandwidth > 0.0) {
    Rng rng(seed, Stream::vibration);
    const auto phi = vibration_phase(out.size(), out.dt, target.vibration_rms, target.vibration_bandwidth, rng);
    for (std::size_t j = 0; j < out.size(); ++j) out.samples[j] *= std::polar(1.0, phi[j]);
  }
  return out;
}

ComplexEnvelope apply_dispersion(const ComplexEnvelope& env, double dispersion_ps_per_nm, double center_wavelength) {
  env.validate();
  ComplexEnvelope out = env;
  if (dispersion_ps_per_nm == 0.0) return out;
  if (!(center_wavelength > 0.0)) throw InvalidArgument("apply_dispersion: center wavelength must be positive");
  const double d = units::ps_per_nm_to_si(dispersion_ps_per_nm);
  const double beta = kPi * d * center_wavelength * center_wavelength / units::kSpeedOfLight;  // s^2
  const std::size_t n = env.size();
  const auto f = fft_frequencies(n, env.dt);
  // Largest group delay on the grid must stay inside half the (cyclic) record.
  const double fmax = 0.5 / env.dt;
  if (std::abs(beta) * fmax / kPi > 0.5 * env.duration())
    throw InvalidArgument("apply_dispersion: group delay spread exceeds the record");
  fft::forward(out.samples);
  for (std::size_t k = 0; k < n; ++k) out.samples[k] *= std::polar(1.0, beta * f[k] * f[k]);
  fft::inverse(out.samples);
  return out;
}

}  // namespace chaosqfc
