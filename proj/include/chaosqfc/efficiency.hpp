#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chaosqfc/propagation.hpp"
#include "chaosqfc/source.hpp"
#include "chaosqfc/stats.hpp"

namespace chaosqfc {

struct SweepGrid {
  double dt = 0.0;
  std::size_t n_samples = 0;
  double duration() const noexcept { return dt * static_cast<double>(n_samples); }
};

struct EfficiencyStats {
  double reference_flux = 0.0;
  MeanSe total_sfg_efficiency;
  MeanSe c_sfg_efficiency;
  double i_sfg_flux = 0.0;  // photons/s
  double baseline_efficiency = 0.0;  // single-frequency inputs of equal flux
  std::size_t n_trials = 0;
  std::size_t n_failed = 0;
  double max_drift = 0.0;
};

// Trial k of every power point uses the source realization seed ^ k.
std::vector<EfficiencyStats> run_efficiency_sweep(const CorrelationSpec& probe, const WaveguideSpec& wg,
                                                  std::span<const double> reference_fluxes, std::size_t n_trials,
                                                  std::uint64_t seed, const SweepGrid& grid,
                                                  const SolverOptions& opts = {});

// Grid used by the presets: walk-off window resolved by 96 samples.
SweepGrid default_sweep_grid(const CorrelationSpec& probe, const WaveguideSpec& wg);

}  // namespace chaosqfc
