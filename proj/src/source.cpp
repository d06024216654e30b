#include "chaosqfc/source.hpp"

#include <cmath>
#include <string>

#include "chaosqfc/errors.hpp"
#include "chaosqfc/fft.hpp"
#include "chaosqfc/stats.hpp"
#include "chaosqfc/units.hpp"

namespace chaosqfc {

void CorrelationSpec::validate() const {
  if (!(flux >= 0.0) || !std::isfinite(flux)) throw InvalidArgument("correlation spec: flux must be >= 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("correlation spec: sigma must be > 0");
}

double CorrelationSpec::correlation(double tau) const {
  const double x = 2.0 * units::kPi * sigma * tau;
  return std::exp(-0.5 * x * x);
}

void check_grid(const CorrelationSpec& spec, double duration, double dt, const char* where) {
  spec.validate();
  const std::string w(where);
  if (!(dt > 0.0)) throw InvalidArgument(w + ": dt must be positive");
  if (dt > (1.0 + 1e-9) / (8.0 * spec.sigma))
    throw InvalidArgument(w + ": grid too coarse, dt = " + std::to_string(dt) + " s exceeds 1/(8 sigma) = " +
                          std::to_string(1.0 / (8.0 * spec.sigma)) + " s");
  if (duration < (1.0 - 1e-9) * 10.0 / spec.sigma)
    throw InvalidArgument(w + ": duration too short, need at least 10/sigma = " +
                          std::to_string(10.0 / spec.sigma) + " s");
}

ComplexEnvelope gaussian_process(double flux, double sigma_hz, std::size_t n, double dt, Rng& rng) {
  if (n < 2) throw InvalidArgument("gaussian_process: need at least 2 samples");
  ComplexEnvelope out = ComplexEnvelope::zeros(n, dt);
  if (flux == 0.0) return out;

  const double df = 1.0 / (static_cast<double>(n) * dt);
  std::vector<double> w(n);
  KahanSum total;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(signed_bin(k, n)) * df / sigma_hz;
    w[k] = std::exp(-0.5 * f * f);
    total.add(w[k]);
  }
  const double norm = static_cast<double>(n) * std::sqrt(flux / total.value());
  auto& x = out.samples;
  auto draw = [&](std::size_t slot) { x[slot] = norm * std::sqrt(w[slot]) * rng.circular_normal(); };
  draw(0);
  for (std::size_t m = 1; m <= n / 2; ++m) {
    draw(m);
    if (m < n - m) draw(n - m);
  }
  fft::inverse(x);
  return out;
}

ChaoticPair synthesize_chaotic_pair(const CorrelationSpec& probe, double reference_flux, double duration,
                                    double dt, std::uint64_t seed) {
  check_grid(probe, duration, dt, "synthesize_chaotic_pair");
  if (!(reference_flux >= 0.0) || !std::isfinite(reference_flux))
    throw InvalidArgument("synthesize_chaotic_pair: reference flux must be >= 0");
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  ChaoticPair pair;
  if (probe.flux == 0.0) {
    pair.probe = ComplexEnvelope::zeros(n, dt);
    pair.reference = ComplexEnvelope::zeros(n, dt);
    return pair;
  }
  Rng rng(seed, Stream::source);
  pair.probe = gaussian_process(probe.flux, probe.sigma, n, dt, rng);
  pair.reference = ComplexEnvelope::zeros(n, dt);
  const double ratio = std::sqrt(reference_flux / probe.flux);
  for (std::size_t j = 0; j < n; ++j) pair.reference.samples[j] = ratio * std::conj(pair.probe.samples[j]);
  return pair;
}

ComplexEnvelope synthesize_noise(const CorrelationSpec& noise, double duration, double dt, std::uint64_t seed) {
  check_grid(noise, duration, dt, "synthesize_noise");
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  Rng rng(seed, Stream::noise);
  return gaussian_process(noise.flux, noise.sigma, n, dt, rng);
}

}  // namespace chaosqfc
