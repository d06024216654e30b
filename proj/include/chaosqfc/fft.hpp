#pragma once

#include <complex>
#include <span>

namespace chaosqfc::fft {

// In-place transforms over FFTW with cached estimate-mode plans, so the
// arithmetic is identical from call to call.
void forward(std::span<std::complex<double>> data);
// Scaled by 1/n.
void inverse(std::span<std::complex<double>> data);
// out.size() must be in.size()/2 + 1.
void forward_real(std::span<const double> in, std::span<std::complex<double>> out);

}  // namespace chaosqfc::fft
