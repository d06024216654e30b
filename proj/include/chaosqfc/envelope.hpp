#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace chaosqfc {

using cplx = std::complex<double>;

// Uniformly sampled complex baseband field. |samples|^2 is photon flux.
struct ComplexEnvelope {
  std::vector<cplx> samples;
  double dt = 0.0;              // s
  double carrier_offset = 0.0;  // Hz, relative to the band center

  ComplexEnvelope() = default;
  ComplexEnvelope(std::vector<cplx> s, double dt_, double carrier = 0.0)
      : samples(std::move(s)), dt(dt_), carrier_offset(carrier) {}

  static ComplexEnvelope zeros(std::size_t n, double dt, double carrier = 0.0);

  std::size_t size() const noexcept { return samples.size(); }
  double duration() const noexcept { return static_cast<double>(samples.size()) * dt; }
  double frequency_spacing() const noexcept { return 1.0 / duration(); }
  double mean_flux() const;
  void validate() const;
};

bool same_grid(const ComplexEnvelope& a, const ComplexEnvelope& b) noexcept;
void require_same_grid(const ComplexEnvelope& a, const ComplexEnvelope& b, const char* where);
void require_common_grid(std::span<const ComplexEnvelope> ensemble, const char* where);

// Baseband frequencies in FFT order (0, df, ..., -df).
std::vector<double> fft_frequencies(std::size_t n, double dt);
// Signed bin index of FFT slot k.
inline long signed_bin(std::size_t k, std::size_t n) noexcept {
  return k <= n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

double mean_power(std::span<const cplx> x);
cplx mean_value(std::span<const cplx> x);

// Binary container: "CQFCENV1", u32 flags (bit 0 = real only), u32 reserved,
// f64 dt, f64 carrier_offset, u64 count, then the body. Little endian.
struct EnvelopeRecord {
  ComplexEnvelope envelope;
  bool real_only = false;
};
void write_envelope(std::ostream& os, const ComplexEnvelope& env);
void write_real_trace(std::ostream& os, std::span<const double> samples, double dt);
EnvelopeRecord read_envelope(std::istream& is);
void write_envelope_csv(std::ostream& os, const ComplexEnvelope& env);

}  // namespace chaosqfc
