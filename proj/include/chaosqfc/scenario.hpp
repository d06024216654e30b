#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chaosqfc/detection.hpp"
#include "chaosqfc/estimators.hpp"
#include "chaosqfc/propagation.hpp"
#include "chaosqfc/source.hpp"
#include "chaosqfc/stats.hpp"
#include "chaosqfc/target.hpp"

namespace chaosqfc {

struct SourceSettings {
  double center_wavelength = 1560e-9;  // m
  double fwhm_wavelength = 7.5e-9;     // m
  double probe_flux = 1e10;            // photons/s, transmitted
  double reference_power = 0.26;       // W
  double sigma() const;
  double reference_flux() const;
  double carrier_frequency() const;
};

struct DispersionSettings {
  double ps_per_nm = 0.0;
  bool compensated = true;
};

struct OpticalGrid {
  double dt = 0.0;
  std::size_t n_samples = 4096;
  double duration() const noexcept { return dt * static_cast<double>(n_samples); }
};

struct ElectricalSettings {
  double sample_rate = 20e6;  // Hz
  std::size_t segments = 3;   // Welch segments per record
  std::size_t records = 2;
};

// direct: one optical-rate record per trial long enough for the ESA.
// two_scale: optical trials fix the c-SFG amplitude and the i-SFG density,
// then an electrical-rate record carries them through the receiver.
enum class LinkMode { automatic, direct, two_scale };
const char* to_string(LinkMode m);

struct ScenarioConfig {
  SourceSettings source;
  double noise_flux = 0.0;  // photons/s, added after the target
  TargetModel target;
  double reference_delay = 0.0;       // s, relative to the nominal balanced path
  double reference_delay_rate = 0.0;  // s/s, delay-line scan speed
  DispersionSettings dispersion;
  WaveguideSpec wg;
  SolverOptions solver;
  DetectionSpec det;
  OpticalGrid grid;
  ElectricalSettings electrical;
  LinkMode mode = LinkMode::automatic;
  std::size_t n_trials = 16;
  std::uint64_t seed = 1;

  CorrelationSpec probe_spec() const;
  // "field: message" for every violated invariant.
  std::vector<std::string> check() const;
  void validate() const;  // throws ConfigError
};

// Samples beyond which the automatic mode switches to two_scale.
inline constexpr std::size_t kDirectModeMaxSamples = std::size_t{1} << 20;

struct LinkSummary {
  std::string mode;
  double received_probe_flux = 0.0;
  double noise_flux = 0.0;
  double c_sfg_flux = 0.0;  // after the optical bandpass
  double c_sfg_flux_se = 0.0;
  double i_sfg_flux = 0.0;
  double i_sfg_density = 0.0;  // photons/s per Hz at the c-SFG frequency
  double c_sfg_efficiency = 0.0;
  double line_frequency = 0.0;  // expected homodyne beat, Hz
  LineMeasurement line;         // ESA measurement
  double snr = 0.0;             // homodyne peak-bin SNR
  double optical_snr = 0.0;     // c-SFG over i-SFG in one rbw
  double dd_snr = 0.0;          // P_p / (P_n + P_p) at the receiver
  double enhancement_db = 0.0;  // optical_snr over dd_snr
  double predicted_enhancement_db = 0.0;
  bool peak_detected = false;
  double manley_rowe_drift = 0.0;
  std::size_t z_steps_max = 0;
  std::size_t n_trials = 0;
};

struct LinkResult {
  HomodyneTrace trace;   // first record
  SpectrumEstimate esa;  // averaged over records
  LinkSummary summary;
};

LinkResult simulate_link(const ScenarioConfig& cfg);

struct RangingProfile {
  std::vector<double> delays;
  std::vector<double> signal;  // background-subtracted homodyne amplitude
  std::vector<double> signal_se;
  std::optional<GaussianFit> fit;
  double fitted_center = 0.0;  // NaN when no peak was found
  double fitted_fwhm = 0.0;
  double max_drift = 0.0;
  bool peak_detected() const { return fit.has_value(); }
};

RangingProfile range_scan(const ScenarioConfig& cfg, std::span<const double> delays);
// Envelope FWHM in delay implied by the field correlation, 2 sqrt(2 ln 2)/(2 pi sigma).
double ranging_fwhm(double sigma);

struct DirectDetectionResult {
  double probe_flux = 0.0;  // received
  double noise_flux = 0.0;
  double snr_measured = 0.0;
  double snr_expected = 0.0;
  TwoSampleResult probe_vs_noise;
};

// Reference withheld: total received power is the only statistic.
DirectDetectionResult direct_detection(const ScenarioConfig& cfg);

}  // namespace chaosqfc
