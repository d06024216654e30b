#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chaosqfc/envelope.hpp"

namespace chaosqfc {

struct CorrelationEstimate {
  std::vector<double> lags;  // s, symmetric around 0
  std::vector<cplx> values;  // photons/s
  std::vector<double> standard_error;
  std::size_t n_members = 0;
  const cplx& at_lag_index(long m) const { return values[static_cast<std::size_t>(m + zero_index())]; }
  long zero_index() const { return static_cast<long>(values.size() / 2); }
};

struct SpectrumEstimate {
  std::vector<double> frequencies;  // Hz, ascending
  std::vector<double> psd;          // photons/s per Hz
  double resolution_bandwidth = 0.0;
  double bin_width = 0.0;           // spacing of the frequency grid
  std::size_t n_averages = 0;
  double integrated_power() const;
  // Power in [lo, hi].
  double band_power(double lo, double hi) const;
};

// <a(t+tau) conj(a(t))>, unbiased over the record, averaged over members.
// A single member is split into 8 blocks for the standard error.
CorrelationEstimate estimate_autocorrelation(std::span<const ComplexEnvelope> ensemble, double max_lag);
// <a(t+tau) conj(b(t))>
CorrelationEstimate estimate_cross_correlation(std::span<const ComplexEnvelope> a,
                                               std::span<const ComplexEnvelope> b, double max_lag);

// Welch average with a periodic Hann window and 50% overlap. The segment
// length is chosen so the window's equivalent noise bandwidth equals rbw.
SpectrumEstimate estimate_psd(std::span<const ComplexEnvelope> ensemble, double resolution_bandwidth);

// One-sided Welch PSD of a real trace (used by the ESA).
SpectrumEstimate estimate_psd_real(std::span<const double> x, double dt, double resolution_bandwidth);

struct TwoSampleResult {
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  bool indistinguishable(double confidence = 0.95) const { return p_value > 1.0 - confidence; }
};

// Compares per-member band powers of two ensembles across `bands` equal
// slices of [-span, span] around the carrier. Welch with resolution rbw.
TwoSampleResult psd_two_sample_test(std::span<const ComplexEnvelope> a, std::span<const ComplexEnvelope> b,
                                    double rbw, double span, std::size_t bands);

}  // namespace chaosqfc
