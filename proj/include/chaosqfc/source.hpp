#pragma once

#include <cstdint>

#include "chaosqfc/envelope.hpp"
#include "chaosqfc/random.hpp"

namespace chaosqfc {

// Gaussian field correlation f(tau) = exp(-tau^2 (2 pi sigma)^2 / 2).
struct CorrelationSpec {
  double flux = 0.0;   // photons/s
  double sigma = 0.0;  // Hz
  void validate() const;
  // Value of the normalized correlation at lag tau.
  double correlation(double tau) const;
};

struct ChaoticPair {
  ComplexEnvelope probe;
  ComplexEnvelope reference;
};

// Reference is sqrt(flux_r/flux_p) conj(probe), sample by sample.
ChaoticPair synthesize_chaotic_pair(const CorrelationSpec& probe, double reference_flux,
                                    double duration, double dt, std::uint64_t seed);

ComplexEnvelope synthesize_noise(const CorrelationSpec& noise, double duration, double dt,
                                 std::uint64_t seed);

// Stationary circular Gaussian process with Gaussian PSD of std sigma_hz on
// n samples. White noise is drawn bin by bin in the order 0, +1, -1, +2, ...
// so records of equal duration on finer grids share their low-frequency
// content.
ComplexEnvelope gaussian_process(double flux, double sigma_hz, std::size_t n, double dt, Rng& rng);

// Throws InvalidArgument when the grid cannot represent the process.
void check_grid(const CorrelationSpec& spec, double duration, double dt, const char* where);

}  // namespace chaosqfc
