#include "chaosqfc/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chaosqfc/errors.hpp"
#include "chaosqfc/fft.hpp"
#include "chaosqfc/parallel.hpp"
#include "chaosqfc/propagation.hpp"
#include "chaosqfc/random.hpp"
#include "chaosqfc/source.hpp"
#include "chaosqfc/stats.hpp"
#include "chaosqfc/units.hpp"

namespace chaosqfc {

using units::kPi;

void GaussianJTA::validate() const {
  if (!(sigma_m > 0.0) || !(sigma_p > 0.0)) throw InvalidArgument("GaussianJTA: sigma_m and sigma_p must be positive");
}

double GaussianJTA::amplitude(double tp, double tr) const {
  const double d = tp - tr, s = tp + tr;
  return std::exp(-d * d / (8.0 * sigma_m * sigma_m) - s * s / (8.0 * sigma_p * sigma_p)) /
         std::sqrt(2.0 * kPi * sigma_p * sigma_m);
}

ChaoticModePair sample_cm_pair(double sigma_plus, double sigma_minus, const TimeGrid& grid, std::uint64_t seed) {
  if (!(sigma_plus > 0.0) || !(sigma_minus > 0.0)) throw InvalidArgument("sample_cm_pair: widths must be positive");
  if (grid.n < 16 || !(grid.dt > 0.0)) throw InvalidArgument("sample_cm_pair: grid too small");
  if (grid.dt > sigma_minus / 4.0 * (1.0 + 1e-9))
    throw InvalidArgument("sample_cm_pair: dt must resolve sigma_minus (dt <= sigma_minus/4)");
  if (grid.duration() < 8.0 * sigma_plus * (1.0 - 1e-9))
    throw InvalidArgument("sample_cm_pair: grid must span 8 sigma_plus");

  ChaoticModePair cm;
  cm.grid = grid;
  cm.sigma_minus = sigma_minus;
  cm.sigma_plus = sigma_plus;
  Rng rng(seed, Stream::chaotic_mode);
  std::vector<cplx> x;
  if (sigma_minus < sigma_plus) {
    const double inv = 1.0 / (sigma_minus * sigma_minus) - 1.0 / (sigma_plus * sigma_plus);
    const double sigma_c = 1.0 / std::sqrt(inv);
    // exp(-tau^2/(8 sigma_c^2)) is the Gaussian PSD process of std 1/(4 pi sigma_c)
    x = gaussian_process(1.0, 1.0 / (4.0 * kPi * sigma_c), grid.n, grid.dt, rng).samples;
  } else {
    x.assign(grid.n, rng.circular_normal());
  }
  double norm = 0.0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double t = grid.time(j);
    x[j] *= std::exp(-t * t / (4.0 * sigma_plus * sigma_plus));
    norm += std::norm(x[j]);
  }
  const double scale = 1.0 / std::sqrt(norm * grid.dt);
  for (auto& v : x) v *= scale;
  cm.a_p = ComplexEnvelope(x, grid.dt);
  cm.a_r = cm.a_p;
  for (auto& v : cm.a_r.samples) v = std::conj(v);
  return cm;
}

namespace {

// Catmull-Rom interpolation of uniformly sampled y at fractional index u.
cplx interpolate(const std::vector<cplx>& y, double u) {
  const auto n = static_cast<long>(y.size());
  const long i = static_cast<long>(std::floor(u));
  const double t = u - static_cast<double>(i);
  auto at = [&](long k) { return y[static_cast<std::size_t>(std::clamp(k, 0L, n - 1))]; };
  const cplx p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

}  // namespace

double herald_single(const GaussianJTA& jta, const ChaoticModePair& cm) {
  const TimeGrid& g = cm.grid;
  const std::size_t n = g.n;
  const double dt = g.dt;
  // -(tp-tr)^2/(8sm^2) - (tp+tr)^2/(8sp^2) = -a (tp - k tr)^2 - d tr^2
  const double im = 1.0 / (8.0 * jta.sigma_m * jta.sigma_m);
  const double ip = 1.0 / (8.0 * jta.sigma_p * jta.sigma_p);
  const double a = im + ip, e = im - ip;
  const double kappa = e / a, d = a - e * e / a;
  const double pref = 1.0 / std::sqrt(2.0 * kPi * jta.sigma_p * jta.sigma_m);

  // H(s) = int conj(a_p(tp)) exp(-a (tp - s)^2) dtp on the grid, by FFT.
  const auto half = static_cast<std::size_t>(std::ceil(std::sqrt(40.0 / a) / dt));
  std::size_t m = 1;
  while (m < n + 2 * half + 1) m <<= 1;
  std::vector<cplx> f(m), k(m);
  for (std::size_t j = 0; j < n; ++j) f[j] = std::conj(cm.a_p.samples[j]);
  for (std::size_t j = 0; j <= half; ++j) {
    const double u = static_cast<double>(j) * dt;
    const double v = std::exp(-a * u * u);
    k[j] = v;
    if (j > 0) k[m - j] = v;
  }
  fft::forward(f);
  fft::forward(k);
  for (std::size_t j = 0; j < m; ++j) f[j] *= k[j];
  fft::inverse(f);
  f.resize(n);
  for (auto& v : f) v *= dt;

  const double t0 = g.time(0);
  cplx num{};
  double den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double tr = g.time(j);
    const double u = (kappa * tr - t0) / dt;
    const cplx phi = pref * std::exp(-d * tr * tr) * interpolate(f, u);
    num += cm.a_p.samples[j] * phi;  // conj(a_r) = a_p
    den += std::norm(phi);
  }
  num *= dt;
  den *= dt;
  if (den < 1e-12) return -1.0;
  return std::clamp(std::norm(num) / den, 0.0, 1.0);
}

TimeGrid heralding_grid(const GaussianJTA& jta, double sigma_plus, double sigma_minus) {
  jta.validate();
  TimeGrid g;
  g.dt = std::min(jta.sigma_m, sigma_minus) / 4.0;
  const double half_width = 5.0 * sigma_plus + 12.0 * jta.sigma_m;
  g.n = 2 * static_cast<std::size_t>(std::ceil(half_width / g.dt));
  return g;
}

HeraldingResult heralding_probability(const GaussianJTA& jta, double sigma_plus, double sigma_minus,
                                      std::size_t n_realizations, const TimeGrid& grid, std::uint64_t seed) {
  jta.validate();
  if (n_realizations < 100) throw InvalidArgument("heralding_probability: need at least 100 realizations");
  if (grid.dt > std::min(jta.sigma_m, sigma_minus) / 4.0 * (1.0 + 1e-9))
    throw InvalidArgument("heralding_probability: grid does not resolve min(sigma_m, sigma_minus)");
  std::vector<double> p(n_realizations);
  parallel_for(n_realizations, [&](std::size_t k) {
    const auto cm = sample_cm_pair(sigma_plus, sigma_minus, grid, member_seed(seed, k));
    p[k] = herald_single(jta, cm);
  });
  std::vector<double> kept;
  for (double v : p)
    if (v >= 0.0) kept.push_back(v);
  HeraldingResult r;
  r.n_realizations = n_realizations;
  r.n_excluded = n_realizations - kept.size();
  if (2 * r.n_excluded > n_realizations)
    throw InvalidArgument("heralding_probability: more than half of the realizations were excluded");
  const auto ms = mean_and_se(kept);
  r.probability = std::clamp(ms.mean, 0.0, 1.0);
  r.standard_error = ms.se;
  r.min_value = *std::min_element(kept.begin(), kept.end());
  r.max_value = *std::max_element(kept.begin(), kept.end());
  return r;
}

SelectivityEstimate selectivity_estimate(double cm_duration, double cm_bandwidth, double filter_bandwidth) {
  if (!(cm_duration > 0.0) || !(cm_bandwidth > 0.0) || !(filter_bandwidth > 0.0))
    throw InvalidArgument("selectivity_estimate: arguments must be positive");
  if (cm_duration * cm_bandwidth < 10.0)
    throw InvalidArgument("selectivity_estimate: time-bandwidth product must be >> 1");
  SelectivityEstimate s;
  s.efficiency_bound = analytic_cw_efficiency(kPi / 2.0, 0.0, cm_bandwidth);
  s.transmitted_fraction = std::min(filter_bandwidth / cm_bandwidth, 1.0);
  s.crosstalk_rejection = 1.0 - s.transmitted_fraction;
  s.target_spectral_width = 1.0 / cm_duration;
  s.clipped = filter_bandwidth * cm_duration <= 1.0 + 1e-12;
  return s;
}

double GramMatrix::mean_offdiagonal_abs2() const {
  if (n < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) s += std::norm((*this)(i, j));
  return s / static_cast<double>(n * (n - 1));
}

GramMatrix cm_gram_matrix(std::span<const ChaoticModePair> pairs) {
  GramMatrix g;
  g.n = pairs.size();
  g.data.resize(g.n * g.n);
  if (pairs.empty()) return g;
  for (const auto& p : pairs) require_same_grid(pairs.front().a_p, p.a_p, "cm_gram_matrix");
  const double dt = pairs.front().a_p.dt;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = i; j < g.n; ++j) {
      cplx s{};
      const auto& a = pairs[i].a_p.samples;
      const auto& b = pairs[j].a_p.samples;
      for (std::size_t t = 0; t < a.size(); ++t) s += std::conj(a[t]) * b[t];
      s *= dt;
      g.data[i * g.n + j] = s;
      g.data[j * g.n + i] = std::conj(s);
    }
  return g;
}

}  // namespace chaosqfc
