#pragma once

#include <numbers>

namespace chaosqfc::units {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPlanck = 6.626'070'15e-34;     // J s
// FWHM of a Gaussian over its standard deviation, 2 sqrt(2 ln 2).
inline constexpr double kFwhmPerSigma = 2.354'820'045'030'949'3;

double optical_frequency(double wavelength_m);
// Width in Hz of a small wavelength span around center_m.
double wavelength_span_to_hz(double span_m, double center_m);
double fwhm_to_sigma(double fwhm);
double sigma_to_fwhm(double sigma);

double photon_energy(double wavelength_m);
double watts_to_flux(double watts, double wavelength_m);
double flux_to_watts(double flux, double wavelength_m);

// ps/nm -> s/m
double ps_per_nm_to_si(double ps_per_nm);

double delay_to_distance(double round_trip_delay_s);
double distance_to_delay(double distance_m);

double to_db(double ratio);
double from_db(double db);

}  // namespace chaosqfc::units
