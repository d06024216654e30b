#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chaosqfc/envelope.hpp"
#include "chaosqfc/estimators.hpp"
#include "chaosqfc/propagation.hpp"

namespace chaosqfc {

struct Bandpass {
  double center = 0.0;  // Hz, on the envelope's frequency axis
  double width = 0.0;   // Hz
};

// Sawtooth phase modulator. levels == 0 is the ideal sawtooth; otherwise the
// phase is an L-step staircase spanning 0..2pi.
struct SerrodyneModel {
  unsigned levels = 0;
};

struct DetectionSpec {
  Bandpass optical_bandpass;
  double serrodyne_shift = 0.0;  // Hz
  SerrodyneModel serrodyne;
  double electrical_rbw = 10.0;   // Hz
  double lo_flux = 1e15;          // photons/s
  double integration_time = 0.1;  // s
  bool shot_noise = true;
  void validate() const;
};

struct CoherentDecomposition {
  double coherent_flux = 0.0;
  double incoherent_flux = 0.0;
  double coherent_fraction = 0.0;
  double n_eff = 0.0;
  double coherent_se = 0.0;
};

// Per-member time mean (demodulated) and mean power.
struct MemberMoments {
  cplx mean;
  double power = 0.0;
};

MemberMoments member_moments(const ComplexEnvelope& env, double at_frequency = 0.0);

// Coherent flux |<mean field>|^2 with the finite-ensemble bias of the trial
// means removed; frequency is relative to the carrier offset.
CoherentDecomposition decompose_coherent(std::span<const ComplexEnvelope> ensemble, double at_frequency = 0.0);
CoherentDecomposition decompose_moments(std::span<const MemberMoments> members, double n_samples);

// Closed-form SFG spectrum on a uniform baseband grid. The background
// coefficient is (P_n + P_p) P_r, the delta term sits in the bin nearest 0.
SpectrumEstimate analytic_sfg_psd(double p_p, double p_r, double p_n, double sigma, const WaveguideSpec& wg,
                                  std::span<const double> freq_grid);
// Integral of the broadband part of analytic_sfg_psd over all frequencies.
double analytic_isfg_power(double p_p, double p_r, double p_n, double sigma, const WaveguideSpec& wg);

struct SnrFigures {
  double snr_qfc = 0.0;           // (2 sqrt(pi) sigma / bw) 2 P_p / (2 P_n + P_p)
  double snr_dd = 0.0;            // P_p / (P_n + P_p)
  double enhancement_db = 0.0;    // 10 log10(2 sqrt(pi) sigma / bw)
  double snr_qfc_gaussian = 0.0;  // (2 sqrt(pi) sigma / bw) P_p / (P_n + P_p)
};
SnrFigures snr_formulas(double p_p, double p_n, double sigma, double bw);

ComplexEnvelope apply_bandpass(const ComplexEnvelope& env, double center, double width);
// Fraction of a flat spectrum over full_width that a rectangle of width passes.
double bandpass_transmission(double width, double full_width);

ComplexEnvelope serrodyne_shift(const ComplexEnvelope& env, double shift, SerrodyneModel model = {});
// Power of the first-order (shifted) line over the residual carrier, in dB.
double serrodyne_carrier_suppression_db(unsigned levels);

struct HomodyneTrace {
  std::vector<double> rf_samples;
  double dt = 0.0;
  double duration() const noexcept { return dt * static_cast<double>(rf_samples.size()); }
};

// rf = sqrt(2) Re(exp(-i phi) s) plus white noise whose one-sided PSD is 1.
// A coherent tone of flux F then carries ESA power F. lo_phase may be empty.
HomodyneTrace balanced_homodyne(const ComplexEnvelope& signal, std::span<const double> lo_phase,
                                const DetectionSpec& det, std::uint64_t seed);

// One-sided Hann-Welch spectrum at the requested rbw. Between 1/duration and
// 1.5/duration a single full-record segment is used and its rbw reported.
SpectrumEstimate esa_spectrum(const HomodyneTrace& trace, double rbw);
// Bin-wise average of spectra with identical grids, weighted by averages.
SpectrumEstimate average_spectra(std::span<const SpectrumEstimate> parts);

struct LineMeasurement {
  double frequency = 0.0;
  double peak_power = 0.0;   // peak bin psd * rbw
  double floor_power = 0.0;  // mean floor psd * rbw
  double floor_power_se = 0.0;
  double floor_std = 0.0;    // per-bin scatter of the floor, in power
  bool detected() const { return peak_power - floor_power > 3.0 * floor_std; }
  double snr = 0.0;          // (peak - floor) / floor
  double fwhm = 0.0;         // Hz, from the bins above half maximum
};

// Peak in [f0 - search, f0 + search], floor from bins with
// floor_inner <= |f - f0| <= floor_outer. The FWHM is read off a copy
// smoothed by a boxcar of smoothing_hz (0 = raw bins).
LineMeasurement measure_line(const SpectrumEstimate& s, double f0, double search, double floor_inner,
                             double floor_outer, double smoothing_hz = 0.0);

}  // namespace chaosqfc
