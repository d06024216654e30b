#include "chaosqfc/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "chaosqfc/detection.hpp"
#include "chaosqfc/errors.hpp"
#include "chaosqfc/parallel.hpp"

namespace chaosqfc {

SweepGrid default_sweep_grid(const CorrelationSpec& probe, const WaveguideSpec& wg) {
  SweepGrid g;
  const double tw = std::abs(wg.walkoff_window());
  g.dt = tw > 0.0 ? tw / 96.0 : 1.0 / (16.0 * probe.sigma);
  g.n_samples = 4096;
  return g;
}

namespace {

double cw_efficiency(double probe_flux, double reference_flux, const WaveguideSpec& wg, double dt,
                     const SolverOptions& opts) {
  const std::size_t n = 16;
  ComplexEnvelope b(std::vector<cplx>(n, std::sqrt(probe_flux)), dt);
  ComplexEnvelope r(std::vector<cplx>(n, std::sqrt(reference_flux)), dt);
  auto res = solve_three_wave(b, r, nullptr, wg, opts);
  return res.flux_out.sfg / res.flux_in.band;
}

struct Trial {
  std::optional<MemberMoments> moments;  // SFG field normalized by sqrt(input flux)
  double drift = 0.0;
};

}  // namespace

std::vector<EfficiencyStats> run_efficiency_sweep(const CorrelationSpec& probe, const WaveguideSpec& wg,
                                                  std::span<const double> reference_fluxes, std::size_t n_trials,
                                                  std::uint64_t seed, const SweepGrid& grid,
                                                  const SolverOptions& opts) {
  if (n_trials < 30) throw InvalidArgument("run_efficiency_sweep: need at least 30 trials for error bars");
  if (!(probe.flux > 0.0)) throw InvalidArgument("run_efficiency_sweep: probe flux must be positive");
  check_grid(probe, grid.duration(), grid.dt, "run_efficiency_sweep");
  wg.validate_for_grid(grid.dt);

  std::vector<EfficiencyStats> out;
  for (double pr : reference_fluxes) {
    if (!(pr >= 0.0)) throw InvalidArgument("run_efficiency_sweep: reference flux must be >= 0");
    std::vector<Trial> trials(n_trials);
    parallel_for(n_trials, [&](std::size_t k) {
      const auto pair = synthesize_chaotic_pair(probe, pr, grid.duration(), grid.dt, member_seed(seed, k));
      try {
        const auto res = solve_three_wave(pair.probe, pair.reference, nullptr, wg, opts);
        const double norm = 1.0 / std::sqrt(res.flux_in.band);
        auto m = member_moments(res.sfg_out);
        m.mean *= norm;
        m.power *= norm * norm;
        trials[k].moments = m;
        trials[k].drift = res.manley_rowe_drift;
      } catch (const ConvergenceError& e) {
        trials[k].drift = e.drift();
      }
    });

    EfficiencyStats st;
    st.reference_flux = pr;
    st.n_trials = n_trials;
    std::vector<MemberMoments> ok;
    for (const auto& t : trials) {
      st.max_drift = std::max(st.max_drift, t.drift);
      if (t.moments)
        ok.push_back(*t.moments);
      else
        ++st.n_failed;
    }
    if (10 * st.n_failed > n_trials)
      throw ConvergenceError("run_efficiency_sweep: " + std::to_string(st.n_failed) + " of " +
                                 std::to_string(n_trials) + " trials failed to converge",
                             st.max_drift);

    const double ns = static_cast<double>(grid.n_samples);
    std::vector<double> eff(ok.size());
    for (std::size_t i = 0; i < ok.size(); ++i) eff[i] = ok[i].power;
    st.total_sfg_efficiency = mean_and_se(eff);
    const auto full = decompose_moments(ok, ns);
    std::vector<MemberMoments> loo(ok.size() - 1);
    auto without = [&](std::size_t i) {
      std::copy(ok.begin(), ok.begin() + static_cast<long>(i), loo.begin());
      std::copy(ok.begin() + static_cast<long>(i) + 1, ok.end(), loo.begin() + static_cast<long>(i));
      return decompose_moments(loo, ns).coherent_flux;
    };
    st.c_sfg_efficiency = jackknife(ok.size(), without, full.coherent_flux);
    st.c_sfg_efficiency.mean = full.coherent_flux;
    st.i_sfg_flux = full.incoherent_flux * probe.flux;
    st.baseline_efficiency = pr > 0.0 ? cw_efficiency(probe.flux, pr, wg, grid.dt, opts) : 0.0;
    out.push_back(st);
  }
  return out;
}

}  // namespace chaosqfc
