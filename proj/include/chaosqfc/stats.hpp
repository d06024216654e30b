#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace chaosqfc {

class KahanSum {
 public:
  void add(double x) noexcept {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const noexcept { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Sample mean and its standard error (NaN se for fewer than 2 values).
MeanSe mean_and_se(std::span<const double> x);
double variance(std::span<const double> x);

// Leave-one-out jackknife: stat is evaluated on every subsample.
template <class Stat>
MeanSe jackknife(std::size_t n, Stat&& stat_without, double full);

struct GaussianFit {
  double amplitude = 0.0;
  double center = 0.0;
  double sigma = 0.0;
  double center_se = 0.0;
  double sigma_se = 0.0;
  double fwhm() const;
};

// Least-squares y ~ a exp(-(x-c)^2/(2 s^2)). Points below floor_fraction of
// the maximum are ignored for the log-quadratic starting guess.
std::optional<GaussianFit> fit_gaussian(std::span<const double> x, std::span<const double> y,
                                        double floor_fraction = 0.05);

// Reference-free kurtosis E[(x-m)^4]/var^2.
double kurtosis(std::span<const double> x);

template <class Stat>
MeanSe jackknife(std::size_t n, Stat&& stat_without, double full) {
  std::vector<double> loo(n);
  for (std::size_t i = 0; i < n; ++i) loo[i] = stat_without(i);
  double m = 0.0;
  for (double v : loo) m += v;
  m /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : loo) ss += (v - m) * (v - m);
  const double nn = static_cast<double>(n);
  MeanSe r;
  r.mean = nn * full - (nn - 1.0) * m;  // bias-corrected
  r.se = std::sqrt((nn - 1.0) / nn * ss);
  return r;
}

}  // namespace chaosqfc
