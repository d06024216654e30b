#include "chaosqfc/units.hpp"

#include <cmath>

namespace chaosqfc::units {

double optical_frequency(double wavelength_m) { return kSpeedOfLight / wavelength_m; }

double wavelength_span_to_hz(double span_m, double center_m) {
  return kSpeedOfLight * span_m / (center_m * center_m);
}

double fwhm_to_sigma(double fwhm) { return fwhm / kFwhmPerSigma; }
double sigma_to_fwhm(double sigma) { return sigma * kFwhmPerSigma; }

double photon_energy(double wavelength_m) { return kPlanck * optical_frequency(wavelength_m); }
double watts_to_flux(double watts, double wavelength_m) { return watts / photon_energy(wavelength_m); }
double flux_to_watts(double flux, double wavelength_m) { return flux * photon_energy(wavelength_m); }

double ps_per_nm_to_si(double ps_per_nm) { return ps_per_nm * 1e-12 / 1e-9; }

double delay_to_distance(double round_trip_delay_s) { return kSpeedOfLight * round_trip_delay_s / 2.0; }
double distance_to_delay(double distance_m) { return 2.0 * distance_m / kSpeedOfLight; }

double to_db(double ratio) { return 10.0 * std::log10(ratio); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace chaosqfc::units
