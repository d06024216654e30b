#include "chaosqfc/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chaosqfc/errors.hpp"
#include "chaosqfc/fft.hpp"
#include "chaosqfc/units.hpp"

namespace chaosqfc {

using units::kPi;

void WaveguideSpec::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("waveguide: gamma must be >= 0");
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("waveguide: length must be > 0");
  if (!std::isfinite(delta_beta)) throw InvalidArgument("waveguide: delta_beta not finite");
  if (n_z_steps < 16) throw InvalidArgument("waveguide: n_z_steps must be >= 16");
}

void WaveguideSpec::validate_for_grid(double dt) const {
  validate();
  if (delta_beta != 0.0 && std::abs(walkoff_window()) < 4.0 * dt * (1.0 - 1e-9))
    throw InvalidArgument("waveguide: walk-off window " + std::to_string(walkoff_window()) +
                          " s is shorter than 4 samples (dt = " + std::to_string(dt) + " s)");
}

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

ComplexEnvelope add_fields(const ComplexEnvelope& a, const ComplexEnvelope* b) {
  ComplexEnvelope out = a;
  if (b)
    for (std::size_t j = 0; j < out.size(); ++j) out.samples[j] += b->samples[j];
  return out;
}

// Advances (s, b, r) by one RK4 step of length h = gamma dz in place and
// accumulates the three fluxes.
void nonlinear_step(cplx* __restrict s, cplx* __restrict b, cplx* __restrict r, std::size_t n, double h,
                    double& ps, double& pb, double& pr) {
  // d/dz s = i h b r, d/dz b = i h s r*, d/dz r = i h s b*
  auto ih = [h](cplx v) { return cplx(-h * v.imag(), h * v.real()); };
  double as = 0.0, ab = 0.0, ar = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx s0 = s[j], b0 = b[j], r0 = r[j];
    const cplx k1s = ih(b0 * r0), k1b = ih(s0 * std::conj(r0)), k1r = ih(s0 * std::conj(b0));
    const cplx s1 = s0 + 0.5 * k1s, b1 = b0 + 0.5 * k1b, r1 = r0 + 0.5 * k1r;
    const cplx k2s = ih(b1 * r1), k2b = ih(s1 * std::conj(r1)), k2r = ih(s1 * std::conj(b1));
    const cplx s2 = s0 + 0.5 * k2s, b2 = b0 + 0.5 * k2b, r2 = r0 + 0.5 * k2r;
    const cplx k3s = ih(b2 * r2), k3b = ih(s2 * std::conj(r2)), k3r = ih(s2 * std::conj(b2));
    const cplx s3 = s0 + k3s, b3 = b0 + k3b, r3 = r0 + k3r;
    const cplx k4s = ih(b3 * r3), k4b = ih(s3 * std::conj(r3)), k4r = ih(s3 * std::conj(b3));
    const cplx sn = s0 + (k1s + 2.0 * (k2s + k3s) + k4s) / 6.0;
    const cplx bn = b0 + (k1b + 2.0 * (k2b + k3b) + k4b) / 6.0;
    const cplx rn = r0 + (k1r + 2.0 * (k2r + k3r) + k4r) / 6.0;
    s[j] = sn;
    b[j] = bn;
    r[j] = rn;
    as += std::norm(sn);
    ab += std::norm(bn);
    ar += std::norm(rn);
  }
  ps = as;
  pb = ab;
  pr = ar;
}

double relative_drift(double now, double start) {
  const double d = std::abs(now - start);
  return start > 0.0 ? d / start : d;
}

}  // namespace

ComplexEnvelope sfg_small_signal(const ComplexEnvelope& input_band, const ComplexEnvelope& reference,
                                 const WaveguideSpec& wg) {
  input_band.validate();
  reference.validate();
  require_same_grid(input_band, reference, "sfg_small_signal");
  wg.validate();
  const std::size_t n = input_band.size();
  ComplexEnvelope out(std::vector<cplx>(n), input_band.dt, input_band.carrier_offset + reference.carrier_offset);
  for (std::size_t j = 0; j < n; ++j) out.samples[j] = input_band.samples[j] * reference.samples[j];
  const cplx gain(0.0, wg.gamma * wg.length);
  const double tw = wg.walkoff_window();
  if (tw == 0.0) {
    for (auto& v : out.samples) v *= gain;
    return out;
  }
  fft::forward(out.samples);
  const auto f = fft_frequencies(n, input_band.dt);
  for (std::size_t k = 0; k < n; ++k) out.samples[k] *= gain * sinc(kPi * f[k] * tw);
  fft::inverse(out.samples);
  return out;
}

PropagationResult integrate_three_wave(const ComplexEnvelope& band, const ComplexEnvelope& reference,
                                       const WaveguideSpec& wg, std::size_t z_steps) {
  const std::size_t n = band.size();
  const double dz = wg.length / static_cast<double>(z_steps);
  const double h = wg.gamma * dz;
  const bool walkoff = wg.delta_beta != 0.0;

  PropagationResult res;
  res.z_steps = z_steps;
  res.probe_out = band;
  res.reference_out = reference;
  res.sfg_out = ComplexEnvelope(std::vector<cplx>(n), band.dt, band.carrier_offset + reference.carrier_offset);
  auto& s = res.sfg_out.samples;
  auto& b = res.probe_out.samples;
  auto& r = res.reference_out.samples;

  double pb0 = 0.0, pr0 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    pb0 += std::norm(b[j]);
    pr0 += std::norm(r[j]);
  }

  std::vector<cplx> full, last;
  if (walkoff) {
    const auto f = fft_frequencies(n, band.dt);
    full.resize(n);
    last.resize(n);
    const double tw = wg.walkoff_window();
    for (std::size_t k = 0; k < n; ++k) {
      const double ph = -2.0 * kPi * f[k] * wg.delta_beta * dz;
      full[k] = std::polar(1.0, ph);
      // last half step, then re-center the walk-off window
      last[k] = std::polar(1.0, 0.5 * ph + kPi * f[k] * tw);
    }
  }
  auto apply = [&](const std::vector<cplx>& phase) {
    fft::forward(s);
    for (std::size_t k = 0; k < n; ++k) s[k] *= phase[k];
    fft::inverse(s);
  };

  double drift = 0.0;
  double ps = 0.0, pb = pb0, pr = pr0;
  for (std::size_t step = 0; step < z_steps; ++step) {
    // s is still zero before the first nonlinear step
    if (walkoff && step > 0) apply(full);
    nonlinear_step(s.data(), b.data(), r.data(), n, h, ps, pb, pr);
    drift = std::max({drift, relative_drift(pb + ps, pb0), relative_drift(pr + ps, pr0)});
  }
  if (walkoff) {
    apply(last);
    double ps_end = 0.0;
    for (const auto& v : s) ps_end += std::norm(v);
    drift = std::max({drift, relative_drift(pb + ps_end, pb0), relative_drift(pr + ps_end, pr0)});
    ps = ps_end;
  }

  const double nn = static_cast<double>(n);
  res.flux_in = {pb0 / nn, pr0 / nn, 0.0};
  res.flux_out = {pb / nn, pr / nn, ps / nn};
  res.manley_rowe_drift = drift;
  return res;
}

PropagationResult solve_three_wave(const ComplexEnvelope& probe, const ComplexEnvelope& reference,
                                   const ComplexEnvelope* noise, const WaveguideSpec& wg, const SolverOptions& opts) {
  probe.validate();
  reference.validate();
  require_same_grid(probe, reference, "solve_three_wave");
  if (noise) require_same_grid(probe, *noise, "solve_three_wave");
  wg.validate_for_grid(probe.dt);
  const ComplexEnvelope band = add_fields(probe, noise);

  double last_drift = 0.0;
  for (std::size_t steps = wg.n_z_steps; steps <= opts.max_z_steps; steps *= 2) {
    auto res = integrate_three_wave(band, reference, wg, steps);
    if (!std::isfinite(res.manley_rowe_drift))
      throw ConvergenceError("solve_three_wave: non-finite fields", res.manley_rowe_drift);
    if (res.manley_rowe_drift <= opts.drift_tolerance) return res;
    last_drift = res.manley_rowe_drift;
  }
  throw ConvergenceError("solve_three_wave: Manley-Rowe drift " + std::to_string(last_drift) +
                             " above tolerance at " + std::to_string(opts.max_z_steps) + " z steps",
                         last_drift);
}

double analytic_cw_efficiency(double gamma_sqrt_pr_l, double delay, double sigma) {
  const double s = std::sin(gamma_sqrt_pr_l);
  const double x = 2.0 * kPi * sigma * delay;
  return s * s * std::exp(-0.5 * x * x);
}

double gamma_for_angle(double theta, double reference_flux, double length) {
  return theta / (std::sqrt(reference_flux) * length);
}

}  // namespace chaosqfc
