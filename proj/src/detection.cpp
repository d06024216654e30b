#include "chaosqfc/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chaosqfc/errors.hpp"
#include "chaosqfc/fft.hpp"
#include "chaosqfc/random.hpp"
#include "chaosqfc/stats.hpp"
#include "chaosqfc/units.hpp"

namespace chaosqfc {

using units::kPi;

void DetectionSpec::validate() const {
  if (!(electrical_rbw > 0.0)) throw InvalidArgument("det.rbw: must be positive");
  if (!(integration_time > 0.0)) throw InvalidArgument("det.integration_time: must be positive");
  if (electrical_rbw < (1.0 - 1e-12) / integration_time)
    throw InvalidArgument("det.rbw: DetectionSpec requires electrical_rbw >= 1/integration_time");
  if (!(optical_bandpass.width > electrical_rbw))
    throw InvalidArgument("det.bandpass_width: DetectionSpec requires optical width > electrical_rbw");
  if (!(lo_flux > 0.0)) throw InvalidArgument("det.lo_flux: must be positive");
  if (serrodyne.levels == 1) throw InvalidArgument("det.serrodyne_levels: need 0 (ideal) or >= 2");
}

MemberMoments member_moments(const ComplexEnvelope& env, double at_frequency) {
  MemberMoments m;
  m.power = env.mean_flux();
  if (at_frequency == 0.0) {
    m.mean = mean_value(env.samples);
    return m;
  }
  KahanSum re, im;
  for (std::size_t j = 0; j < env.size(); ++j) {
    const cplx v = env.samples[j] * std::polar(1.0, -2.0 * kPi * at_frequency * static_cast<double>(j) * env.dt);
    re.add(v.real());
    im.add(v.imag());
  }
  const double n = static_cast<double>(env.size());
  m.mean = {re.value() / n, im.value() / n};
  return m;
}

CoherentDecomposition decompose_moments(std::span<const MemberMoments> members, double n_samples) {
  if (members.size() < 2) throw InvalidArgument("decompose_coherent: need at least 2 ensemble members");
  if (!(n_samples >= 2.0)) throw InvalidArgument("decompose_coherent: no time averaging possible");
  const double k = static_cast<double>(members.size());
  KahanSum re, im, pw;
  for (const auto& m : members) {
    re.add(m.mean.real());
    im.add(m.mean.imag());
    pw.add(m.power);
  }
  const cplx mean(re.value() / k, im.value() / k);
  const double power = pw.value() / k;
  KahanSum ss;
  for (const auto& m : members) ss.add(std::norm(m.mean - mean));
  const double var = ss.value() / (k - 1.0);  // scatter of the per-member means
  const double bias = var / k;

  CoherentDecomposition d;
  d.coherent_flux = std::max(std::norm(mean) - bias, 0.0);
  d.incoherent_flux = std::max(power - d.coherent_flux, 0.0);
  const double total = d.coherent_flux + d.incoherent_flux;
  d.coherent_fraction = total > 0.0 ? d.coherent_flux / total : 0.0;
  d.n_eff = var > 0.0 ? k * d.incoherent_flux / var : std::numeric_limits<double>::infinity();
  d.coherent_se = std::sqrt(2.0 * std::norm(mean) * bias + bias * bias);
  return d;
}

CoherentDecomposition decompose_coherent(std::span<const ComplexEnvelope> ensemble, double at_frequency) {
  if (ensemble.size() < 2) throw InvalidArgument("decompose_coherent: need at least 2 ensemble members");
  require_common_grid(ensemble, "decompose_coherent");
  std::vector<MemberMoments> m;
  m.reserve(ensemble.size());
  for (const auto& e : ensemble) m.push_back(member_moments(e, at_frequency));
  return decompose_moments(m, static_cast<double>(ensemble.front().size()));
}

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double isfg_shape(double f, double sigma, double tw) {
  const double g = std::exp(-f * f / (4.0 * sigma * sigma)) / (2.0 * std::sqrt(kPi) * sigma);
  const double s = sinc(kPi * f * tw);
  return g * s * s;
}

}  // namespace

SpectrumEstimate analytic_sfg_psd(double p_p, double p_r, double p_n, double sigma, const WaveguideSpec& wg,
                                  std::span<const double> freq_grid) {
  if (freq_grid.size() < 2) throw InvalidArgument("analytic_sfg_psd: grid needs at least 2 points");
  if (!(sigma > 0.0)) throw InvalidArgument("analytic_sfg_psd: sigma must be positive");
  const double df = freq_grid[1] - freq_grid[0];
  if (!(df > 0.0)) throw InvalidArgument("analytic_sfg_psd: grid must be ascending");
  if (freq_grid.front() > -4.0 * sigma || freq_grid.back() < 4.0 * sigma)
    throw InvalidArgument("analytic_sfg_psd: grid must span at least +-4 sigma");
  const double g2l2 = wg.gamma * wg.gamma * wg.length * wg.length;
  const double tw = wg.walkoff_window();
  SpectrumEstimate s;
  s.frequencies.assign(freq_grid.begin(), freq_grid.end());
  s.psd.resize(freq_grid.size());
  s.bin_width = df;
  s.resolution_bandwidth = df;
  std::size_t zero = 0;
  for (std::size_t i = 0; i < freq_grid.size(); ++i) {
    s.psd[i] = g2l2 * (p_n + p_p) * p_r * isfg_shape(freq_grid[i], sigma, tw);
    if (std::abs(freq_grid[i]) < std::abs(freq_grid[zero])) zero = i;
  }
  s.psd[zero] += g2l2 * p_p * p_r / df;
  return s;
}

double analytic_isfg_power(double p_p, double p_r, double p_n, double sigma, const WaveguideSpec& wg) {
  const double tw = std::abs(wg.walkoff_window());
  // Trapezoid over +-12 sigma; step resolves both the Gaussian and the sinc.
  const double span = 12.0 * sigma;
  double step = sigma / 200.0;
  if (tw > 0.0) step = std::min(step, 1.0 / (200.0 * tw));
  const auto n = static_cast<long>(std::ceil(span / step));
  step = span / static_cast<double>(n);
  KahanSum acc;
  for (long i = -n; i <= n; ++i) {
    const double w = (i == -n || i == n) ? 0.5 : 1.0;
    acc.add(w * isfg_shape(static_cast<double>(i) * step, sigma, tw));
  }
  return wg.gamma * wg.gamma * wg.length * wg.length * (p_n + p_p) * p_r * acc.value() * step;
}

SnrFigures snr_formulas(double p_p, double p_n, double sigma, double bw) {
  if (!(bw > 0.0) || !(sigma > 0.0)) throw InvalidArgument("snr_formulas: sigma and bw must be positive");
  if (!(p_p + p_n > 0.0) || p_p < 0.0 || p_n < 0.0) throw InvalidArgument("snr_formulas: need P_p + P_n > 0");
  const double ratio = 2.0 * std::sqrt(kPi) * sigma / bw;
  SnrFigures r;
  r.snr_qfc = ratio * 2.0 * p_p / (2.0 * p_n + p_p);
  r.snr_dd = p_p / (p_n + p_p);
  r.enhancement_db = units::to_db(ratio);
  r.snr_qfc_gaussian = ratio * p_p / (p_n + p_p);
  return r;
}

ComplexEnvelope apply_bandpass(const ComplexEnvelope& env, double center, double width) {
  env.validate();
  const double df = env.frequency_spacing();
  if (width < 2.0 * df * (1.0 - 1e-9))
    throw InvalidArgument("apply_bandpass: width must be at least 2 frequency bins");
  const double nyquist = 0.5 / env.dt;
  if (std::abs(center - env.carrier_offset) + 0.5 * width > nyquist * (1.0 + 1e-12))
    throw InvalidArgument("apply_bandpass: band extends outside the Nyquist range");
  ComplexEnvelope out = env;
  fft::forward(out.samples);
  const double lo = center - 0.5 * width - 1e-9 * df;
  const double hi = center + 0.5 * width - 1e-9 * df;
  const std::size_t n = env.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double f = env.carrier_offset + static_cast<double>(signed_bin(k, n)) * df;
    if (f < lo || f >= hi) out.samples[k] = 0.0;
  }
  fft::inverse(out.samples);
  return out;
}

double bandpass_transmission(double width, double full_width) {
  if (!(full_width > 0.0) || width < 0.0) throw InvalidArgument("bandpass_transmission: bad widths");
  return std::min(width / full_width, 1.0);
}

namespace {

double serrodyne_phase(double frac, unsigned levels) {
  if (levels == 0) return 2.0 * kPi * frac;
  const double l = static_cast<double>(levels);
  const double q = std::min(std::floor(l * frac), l - 1.0);
  return 2.0 * kPi * q / (l - 1.0);
}

}  // namespace

ComplexEnvelope serrodyne_shift(const ComplexEnvelope& env, double shift, SerrodyneModel model) {
  env.validate();
  if (std::abs(shift) >= 0.125 / env.dt) throw InvalidArgument("serrodyne_shift: |shift| must be below Nyquist/4");
  if (model.levels == 1) throw InvalidArgument("serrodyne_shift: a staircase needs at least 2 levels");
  ComplexEnvelope out = env;
  if (shift == 0.0) return out;
  for (std::size_t j = 0; j < env.size(); ++j) {
    const double x = shift * static_cast<double>(j) * env.dt;
    const double phase = serrodyne_phase(x - std::floor(x), model.levels);
    out.samples[j] *= std::polar(1.0, phase);
  }
  return out;
}

double serrodyne_carrier_suppression_db(unsigned levels) {
  if (levels == 0) return std::numeric_limits<double>::infinity();
  if (levels < 2) throw InvalidArgument("serrodyne_carrier_suppression_db: need at least 2 levels");
  const double l = static_cast<double>(levels);
  cplx c0{}, c1{};
  for (unsigned q = 0; q < levels; ++q) {
    const cplx e = std::polar(1.0, 2.0 * kPi * q / (l - 1.0));
    c0 += e / l;
    c1 += e * std::polar(1.0, -2.0 * kPi * (q + 0.5) / l) * sinc(kPi / l) / l;
  }
  return units::to_db(std::norm(c1) / std::norm(c0));
}

HomodyneTrace balanced_homodyne(const ComplexEnvelope& signal, std::span<const double> lo_phase,
                                const DetectionSpec& det, std::uint64_t seed) {
  signal.validate();
  if (!(det.lo_flux > 0.0)) throw InvalidArgument("balanced_homodyne: LO flux must be positive");
  if (signal.mean_flux() > 1e-2 * det.lo_flux)
    throw InvalidArgument("balanced_homodyne: LO must dominate the signal (linearized regime)");
  if (!lo_phase.empty() && lo_phase.size() != signal.size())
    throw InvalidArgument("balanced_homodyne: LO phase record length differs from signal");
  HomodyneTrace tr;
  tr.dt = signal.dt;
  tr.rf_samples.resize(signal.size());
  const double carrier = signal.carrier_offset;
  for (std::size_t j = 0; j < signal.size(); ++j) {
    double phi = lo_phase.empty() ? 0.0 : lo_phase[j];
    if (carrier != 0.0) phi -= 2.0 * kPi * carrier * static_cast<double>(j) * signal.dt;
    const cplx v = signal.samples[j] * std::polar(1.0, -phi);
    tr.rf_samples[j] = M_SQRT2 * v.real();
  }
  if (det.shot_noise) {
    Rng rng(seed, Stream::shot_noise);
    const double sd = std::sqrt(0.5 / signal.dt);
    for (auto& v : tr.rf_samples) v += sd * rng.normal();
  }
  return tr;
}

SpectrumEstimate esa_spectrum(const HomodyneTrace& trace, double rbw) {
  const double duration = trace.duration();
  if (trace.rf_samples.size() < 8 || !(trace.dt > 0.0)) throw InvalidArgument("esa_spectrum: trace too short");
  if (!(rbw > 0.0) || rbw < (1.0 - 1e-9) / duration)
    throw InvalidArgument("esa_spectrum: rbw below the reciprocal record duration");
  const double achievable = 1.5 / duration;
  return estimate_psd_real(trace.rf_samples, trace.dt, std::max(rbw, achievable));
}

SpectrumEstimate average_spectra(std::span<const SpectrumEstimate> parts) {
  if (parts.empty()) throw InvalidArgument("average_spectra: nothing to average");
  SpectrumEstimate out = parts.front();
  std::fill(out.psd.begin(), out.psd.end(), 0.0);
  out.n_averages = 0;
  for (const auto& p : parts) {
    if (p.psd.size() != out.psd.size() || p.bin_width != out.bin_width)
      throw InvalidArgument("average_spectra: spectra on different grids");
    out.n_averages += p.n_averages;
  }
  for (const auto& p : parts) {
    const double w = static_cast<double>(p.n_averages) / static_cast<double>(out.n_averages);
    for (std::size_t i = 0; i < p.psd.size(); ++i) out.psd[i] += w * p.psd[i];
  }
  return out;
}

LineMeasurement measure_line(const SpectrumEstimate& s, double f0, double search, double floor_inner,
                             double floor_outer, double smoothing_hz) {
  if (s.psd.empty()) throw InvalidArgument("measure_line: empty spectrum");
  const double rbw = s.resolution_bandwidth;
  LineMeasurement m;
  std::size_t peak = s.psd.size();
  std::vector<double> floor_bins;
  for (std::size_t i = 0; i < s.psd.size(); ++i) {
    const double d = std::abs(s.frequencies[i] - f0);
    if (d <= search && (peak == s.psd.size() || s.psd[i] > s.psd[peak])) peak = i;
    if (d >= floor_inner && d <= floor_outer) floor_bins.push_back(s.psd[i]);
  }
  if (peak == s.psd.size()) throw InvalidArgument("measure_line: search window holds no bins");
  m.frequency = s.frequencies[peak];
  m.peak_power = s.psd[peak] * rbw;
  if (!floor_bins.empty()) {
    const auto fs = mean_and_se(floor_bins);
    m.floor_power = fs.mean * rbw;
    m.floor_power_se = std::isfinite(fs.se) ? fs.se * rbw : 0.0;
    m.floor_std = m.floor_power_se * std::sqrt(static_cast<double>(floor_bins.size()));
  }
  m.snr = m.floor_power > 0.0 ? (m.peak_power - m.floor_power) / m.floor_power
                              : std::numeric_limits<double>::infinity();

  // Half-maximum crossings on a smoothed copy around the peak.
  const auto half_bins = static_cast<long>(std::floor(0.5 * smoothing_hz / s.bin_width));
  const long n = static_cast<long>(s.psd.size());
  auto smooth = [&](long i) {
    if (half_bins <= 0) return s.psd[static_cast<std::size_t>(i)];
    double acc = 0.0;
    long c = 0;
    for (long j = std::max(0L, i - half_bins); j <= std::min(n - 1, i + half_bins); ++j, ++c)
      acc += s.psd[static_cast<std::size_t>(j)];
    return acc / static_cast<double>(c);
  };
  const double floor_psd = floor_bins.empty() ? 0.0 : m.floor_power / rbw;
  long top = static_cast<long>(peak);
  if (half_bins > 0) {
    const long lo = std::max(0L, top - 4 * half_bins), hi = std::min(n - 1, top + 4 * half_bins);
    double best = -1.0;
    for (long i = lo; i <= hi; ++i)
      if (double v = smooth(i); v > best) {
        best = v;
        top = i;
      }
  }
  const double half = floor_psd + 0.5 * (smooth(top) - floor_psd);
  auto crossing = [&](long dir) {
    long i = top;
    while (i + dir >= 0 && i + dir < n && smooth(i + dir) > half) i += dir;
    if (i + dir < 0 || i + dir >= n) return s.frequencies[static_cast<std::size_t>(i)];
    const double a = smooth(i), b = smooth(i + dir);
    const double t = (a - half) / (a - b);
    return s.frequencies[static_cast<std::size_t>(i)] + dir * t * s.bin_width;
  };
  m.fwhm = crossing(+1) - crossing(-1);
  return m;
}

}  // namespace chaosqfc
