#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chaosqfc/envelope.hpp"

namespace chaosqfc {

// Centered time grid t_j = (j - (n-1)/2) dt.
struct TimeGrid {
  double dt = 0.0;
  std::size_t n = 0;
  double time(std::size_t j) const noexcept { return (static_cast<double>(j) - 0.5 * static_cast<double>(n - 1)) * dt; }
  double duration() const noexcept { return dt * static_cast<double>(n); }
  TimeGrid halved() const { return {dt / 2.0, 2 * n}; }
};

// psi(tp, tr) = (2 pi sp sm)^-1/2 exp(-(tp-tr)^2/(8 sm^2) - (tp+tr)^2/(8 sp^2))
struct GaussianJTA {
  double sigma_m = 0.0;  // s, pair correlation time
  double sigma_p = 0.0;  // s, pair duration
  void validate() const;
  double amplitude(double tp, double tr) const;
};

struct ChaoticModePair {
  ComplexEnvelope a_p;  // unit norm on the grid
  ComplexEnvelope a_r;  // conj(a_p)
  TimeGrid grid;
  double sigma_minus = 0.0;
  double sigma_plus = 0.0;
};

// Stationary circular Gaussian field of correlation width sigma_c, with
// 1/sigma_c^2 = 1/sigma_minus^2 - 1/sigma_plus^2, under the envelope
// exp(-t^2/(4 sigma_plus^2)). For sigma_minus >= sigma_plus the field is
// fully coherent.
ChaoticModePair sample_cm_pair(double sigma_plus, double sigma_minus, const TimeGrid& grid, std::uint64_t seed);

struct HeraldingResult {
  double probability = 0.0;
  double standard_error = 0.0;
  std::size_t n_realizations = 0;
  std::size_t n_excluded = 0;
  double min_value = 0.0;
  double max_value = 0.0;
};

// P = |<a_r| phi>|^2 / <phi|phi>, phi(tr) = int conj(a_p(tp)) psi(tp, tr) dtp.
// Returns a negative value when <phi|phi> is below 1e-12.
double herald_single(const GaussianJTA& jta, const ChaoticModePair& cm);

HeraldingResult heralding_probability(const GaussianJTA& jta, double sigma_plus, double sigma_minus,
                                      std::size_t n_realizations, const TimeGrid& grid, std::uint64_t seed);

// dt = min(sigma_m, sigma_minus)/4, spanning the CM envelope and the JTA tails.
TimeGrid heralding_grid(const GaussianJTA& jta, double sigma_plus, double sigma_minus);

struct SelectivityEstimate {
  double efficiency_bound = 0.0;
  double crosstalk_rejection = 0.0;
  double transmitted_fraction = 0.0;
  double target_spectral_width = 0.0;  // Hz, ~ 1/duration
  bool clipped = false;                // filter <= 1/duration
};

SelectivityEstimate selectivity_estimate(double cm_duration, double cm_bandwidth, double filter_bandwidth);

struct GramMatrix {
  std::size_t n = 0;
  std::vector<cplx> data;  // row major
  cplx operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
  double mean_offdiagonal_abs2() const;
};

// G_ij = sum conj(a_p,i) a_p,j dt
GramMatrix cm_gram_matrix(std::span<const ChaoticModePair> pairs);

}  // namespace chaosqfc
