#include "chaosqfc/estimators.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <string>

#include "chaosqfc/errors.hpp"
#include "chaosqfc/fft.hpp"
#include "chaosqfc/stats.hpp"
#include "chaosqfc/units.hpp"

namespace chaosqfc {

double SpectrumEstimate::integrated_power() const {
  KahanSum s;
  for (double p : psd) s.add(p);
  return s.value() * bin_width;
}

double SpectrumEstimate::band_power(double lo, double hi) const {
  KahanSum s;
  for (std::size_t i = 0; i < psd.size(); ++i)
    if (frequencies[i] >= lo && frequencies[i] <= hi) s.add(psd[i]);
  return s.value() * bin_width;
}

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

// Unbiased lag products for lags -mmax..mmax of one (a, b) record pair.
std::vector<cplx> lag_products(std::span<const cplx> a, std::span<const cplx> b, std::size_t mmax) {
  const std::size_t n = a.size();
  const std::size_t m = next_pow2(n + mmax + 1);
  std::vector<cplx> fa(m), fb(m);
  std::copy(a.begin(), a.end(), fa.begin());
  std::copy(b.begin(), b.end(), fb.begin());
  fft::forward(fa);
  fft::forward(fb);
  for (std::size_t k = 0; k < m; ++k) fa[k] *= std::conj(fb[k]);
  fft::inverse(fa);
  std::vector<cplx> out(2 * mmax + 1);
  for (std::size_t lag = 0; lag <= mmax; ++lag) {
    const double norm = 1.0 / static_cast<double>(n - lag);
    out[mmax + lag] = fa[lag] * norm;
    if (lag > 0) out[mmax - lag] = fa[m - lag] * norm;
  }
  return out;
}

}  // namespace

CorrelationEstimate estimate_cross_correlation(std::span<const ComplexEnvelope> a,
                                               std::span<const ComplexEnvelope> b, double max_lag) {
  if (a.empty() || b.empty()) throw InvalidArgument("estimate_correlation: empty ensemble");
  if (a.size() != b.size()) throw InvalidArgument("estimate_correlation: ensembles differ in size");
  require_common_grid(a, "estimate_correlation");
  require_common_grid(b, "estimate_correlation");
  require_same_grid(a.front(), b.front(), "estimate_correlation");
  const auto& g = a.front();
  if (!(max_lag >= 0.0) || max_lag >= g.duration() / 4.0)
    throw InvalidArgument("estimate_correlation: max_lag must be below duration/4");
  const auto mmax = static_cast<std::size_t>(std::floor(max_lag / g.dt + 1e-9));
  const std::size_t width = 2 * mmax + 1;

  // Per-member (or per-block) estimates feed the scatter.
  std::vector<std::vector<cplx>> parts;
  CorrelationEstimate est;
  est.n_members = a.size();
  est.values.assign(width, cplx{});
  if (a.size() >= 2) {
    for (std::size_t k = 0; k < a.size(); ++k) parts.push_back(lag_products(a[k].samples, b[k].samples, mmax));
    for (const auto& p : parts)
      for (std::size_t i = 0; i < width; ++i) est.values[i] += p[i];
    for (auto& v : est.values) v /= static_cast<double>(parts.size());
  } else {
    est.values = lag_products(a[0].samples, b[0].samples, mmax);
    const std::size_t blocks = 8;
    const std::size_t len = g.size() / blocks;
    if (len > 4 * mmax && len >= 2) {
      std::span<const cplx> sa(a[0].samples), sb(b[0].samples);
      for (std::size_t k = 0; k < blocks; ++k)
        parts.push_back(lag_products(sa.subspan(k * len, len), sb.subspan(k * len, len), mmax));
    }
  }

  est.standard_error.assign(width, std::nan(""));
  if (parts.size() >= 2) {
    std::vector<cplx> mean(width);
    for (const auto& p : parts)
      for (std::size_t i = 0; i < width; ++i) mean[i] += p[i];
    for (auto& v : mean) v /= static_cast<double>(parts.size());
    const double kk = static_cast<double>(parts.size());
    for (std::size_t i = 0; i < width; ++i) {
      double ss = 0.0;
      for (const auto& p : parts) ss += std::norm(p[i] - mean[i]);
      est.standard_error[i] = std::sqrt(ss / (kk - 1.0) / kk);
    }
  }
  est.lags.resize(width);
  for (std::size_t i = 0; i < width; ++i)
    est.lags[i] = (static_cast<double>(i) - static_cast<double>(mmax)) * g.dt;
  return est;
}

CorrelationEstimate estimate_autocorrelation(std::span<const ComplexEnvelope> ensemble, double max_lag) {
  auto est = estimate_cross_correlation(ensemble, ensemble, max_lag);
  // Exact Hermitian symmetry and a real zero lag.
  const std::size_t mid = est.values.size() / 2;
  est.values[mid] = est.values[mid].real();
  for (std::size_t m = 1; m <= mid; ++m) est.values[mid - m] = std::conj(est.values[mid + m]);
  return est;
}

namespace {

std::size_t segment_length(double rbw, double dt, std::size_t n, const char* where) {
  if (!(rbw > 0.0)) throw InvalidArgument(std::string(where) + ": resolution bandwidth must be positive");
  const auto nseg = static_cast<std::size_t>(std::llround(1.5 / (rbw * dt)));
  if (nseg < 4) throw InvalidArgument(std::string(where) + ": resolution bandwidth wider than the grid allows");
  if (nseg > n)
    throw InvalidArgument(std::string(where) + ": resolution bandwidth " + std::to_string(rbw) +
                          " Hz unachievable for record duration " + std::to_string(static_cast<double>(n) * dt) +
                          " s");
  return nseg;
}

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j)
    w[j] = 0.5 - 0.5 * std::cos(2.0 * units::kPi * static_cast<double>(j) / static_cast<double>(n));
  return w;
}

}  // namespace

SpectrumEstimate estimate_psd(std::span<const ComplexEnvelope> ensemble, double resolution_bandwidth) {
  require_common_grid(ensemble, "estimate_psd");
  const auto& g = ensemble.front();
  if (resolution_bandwidth < (1.0 - 1e-9) * 2.0 / g.duration())
    throw InvalidArgument("estimate_psd: resolution bandwidth below 2/duration is unachievable");
  const std::size_t nseg = segment_length(resolution_bandwidth, g.dt, g.size(), "estimate_psd");
  const std::size_t hop = std::max<std::size_t>(nseg / 2, 1);
  const auto w = hann(nseg);
  double w2 = 0.0;
  for (double v : w) w2 += v * v;

  std::vector<double> acc(nseg, 0.0);
  std::vector<cplx> buf(nseg);
  std::size_t count = 0;
  for (const auto& e : ensemble) {
    for (std::size_t start = 0; start + nseg <= e.size(); start += hop) {
      for (std::size_t j = 0; j < nseg; ++j) buf[j] = e.samples[start + j] * w[j];
      fft::forward(buf);
      for (std::size_t k = 0; k < nseg; ++k) acc[k] += std::norm(buf[k]);
      ++count;
    }
  }
  SpectrumEstimate s;
  s.n_averages = count;
  s.bin_width = 1.0 / (static_cast<double>(nseg) * g.dt);
  s.resolution_bandwidth = 1.5 * s.bin_width;
  s.frequencies.resize(nseg);
  s.psd.resize(nseg);
  const double scale = g.dt / (w2 * static_cast<double>(count));
  // Ascending order: negative bins first.
  const std::size_t first = nseg / 2 + 1;
  for (std::size_t i = 0; i < nseg; ++i) {
    const std::size_t k = (first + i) % nseg;
    s.frequencies[i] = static_cast<double>(signed_bin(k, nseg)) * s.bin_width + g.carrier_offset;
    s.psd[i] = acc[k] * scale;
  }
  return s;
}

SpectrumEstimate estimate_psd_real(std::span<const double> x, double dt, double resolution_bandwidth) {
  const std::size_t nseg = segment_length(resolution_bandwidth, dt, x.size(), "estimate_psd_real");
  const std::size_t hop = std::max<std::size_t>(nseg / 2, 1);
  const auto w = hann(nseg);
  double w2 = 0.0;
  for (double v : w) w2 += v * v;
  const std::size_t nbins = nseg / 2 + 1;
  std::vector<double> acc(nbins, 0.0), seg(nseg);
  std::vector<cplx> spec(nbins);
  std::size_t count = 0;
  for (std::size_t start = 0; start + nseg <= x.size(); start += hop) {
    for (std::size_t j = 0; j < nseg; ++j) seg[j] = x[start + j] * w[j];
    fft::forward_real(seg, spec);
    for (std::size_t k = 0; k < nbins; ++k) acc[k] += std::norm(spec[k]);
    ++count;
  }
  SpectrumEstimate s;
  s.n_averages = count;
  s.bin_width = 1.0 / (static_cast<double>(nseg) * dt);
  s.resolution_bandwidth = 1.5 * s.bin_width;
  s.frequencies.resize(nbins);
  s.psd.resize(nbins);
  const double scale = dt / (w2 * static_cast<double>(count));
  for (std::size_t k = 0; k < nbins; ++k) {
    const bool edge = k == 0 || (nseg % 2 == 0 && k == nseg / 2);
    s.frequencies[k] = static_cast<double>(k) * s.bin_width;
    s.psd[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
  }
  return s;
}

TwoSampleResult psd_two_sample_test(std::span<const ComplexEnvelope> a, std::span<const ComplexEnvelope> b,
                                    double rbw, double span, std::size_t bands) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("psd_two_sample_test: need >= 2 members per sample");
  if (bands < 1 || !(span > 0.0)) throw InvalidArgument("psd_two_sample_test: bad band layout");
  auto band_powers = [&](std::span<const ComplexEnvelope> ens) {
    std::vector<std::vector<double>> p(bands, std::vector<double>(ens.size()));
    for (std::size_t k = 0; k < ens.size(); ++k) {
      const auto s = estimate_psd(ens.subspan(k, 1), rbw);
      const double c = ens[k].carrier_offset;
      const double width = 2.0 * span / static_cast<double>(bands);
      for (std::size_t j = 0; j < bands; ++j) {
        const double lo = c - span + static_cast<double>(j) * width;
        p[j][k] = s.band_power(lo, lo + width * (1.0 - 1e-12));
      }
    }
    return p;
  };
  const auto pa = band_powers(a);
  const auto pb = band_powers(b);
  TwoSampleResult r;
  for (std::size_t j = 0; j < bands; ++j) {
    const auto ma = mean_and_se(pa[j]);
    const auto mb = mean_and_se(pb[j]);
    const double se2 = ma.se * ma.se + mb.se * mb.se;
    if (!(se2 > 0.0)) continue;
    const double z = (ma.mean - mb.mean);
    r.chi2 += z * z / se2;
    ++r.dof;
  }
  if (r.dof == 0) return r;
  boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.chi2));
  return r;
}

}  // namespace chaosqfc
