#include "chaosqfc/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "chaosqfc/units.hpp"

namespace chaosqfc {

MeanSe mean_and_se(std::span<const double> x) {
  MeanSe r;
  if (x.empty()) return r;
  KahanSum s;
  for (double v : x) s.add(v);
  r.mean = s.value() / static_cast<double>(x.size());
  r.se = x.size() < 2 ? std::nan("") : std::sqrt(variance(x) / static_cast<double>(x.size()));
  return r;
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return std::nan("");
  KahanSum s;
  for (double v : x) s.add(v);
  const double m = s.value() / static_cast<double>(x.size());
  KahanSum ss;
  for (double v : x) ss.add((v - m) * (v - m));
  return ss.value() / static_cast<double>(x.size() - 1);
}

double kurtosis(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  KahanSum s;
  for (double v : x) s.add(v);
  const double m = s.value() / n;
  KahanSum m2, m4;
  for (double v : x) {
    const double d2 = (v - m) * (v - m);
    m2.add(d2);
    m4.add(d2 * d2);
  }
  const double var = m2.value() / n;
  return m4.value() / n / (var * var);
}

double GaussianFit::fwhm() const { return units::sigma_to_fwhm(sigma); }

std::optional<GaussianFit> fit_gaussian(std::span<const double> x, std::span<const double> y,
                                        double floor_fraction) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 4) return std::nullopt;
  const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double ymax = y[peak];
  if (!(ymax > 0.0)) return std::nullopt;
  const double x0 = x[peak];
  const double scale = (x.back() - x.front()) / 2.0;
  if (!(std::abs(scale) > 0.0)) return std::nullopt;

  // Weighted log-quadratic on the points well above the floor (weights y^2).
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > floor_fraction * ymax)) continue;
    const double u = (x[i] - x0) / scale;
    const Eigen::Vector3d row(1.0, u, u * u);
    const double w = y[i] * y[i];
    ata += w * row * row.transpose();
    atb += w * row * std::log(y[i]);
    ++used;
  }
  if (used < 3) return std::nullopt;
  const Eigen::Vector3d q = ata.ldlt().solve(atb);
  if (!(q[2] < 0.0)) return std::nullopt;
  double s = std::sqrt(-1.0 / (2.0 * q[2]));
  double c = -q[1] / (2.0 * q[2]);
  double a = std::exp(q[0] - q[1] * q[1] / (4.0 * q[2]));

  // Gauss-Newton on all points, in scaled coordinates.
  auto residuals = [&](double aa, double cc, double ss, Eigen::VectorXd* r, Eigen::MatrixXd* jac) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (x[i] - x0) / scale;
      const double d = (u - cc) / ss;
      const double g = std::exp(-0.5 * d * d);
      const double ri = y[i] - aa * g;
      sum += ri * ri;
      if (r) (*r)[static_cast<long>(i)] = ri;
      if (jac) {
        jac->row(static_cast<long>(i)) << g, aa * g * d / ss, aa * g * d * d / ss;
      }
    }
    return sum;
  };
  Eigen::VectorXd r(n);
  Eigen::MatrixXd jac(n, 3);
  double cost = residuals(a, c, s, &r, &jac);
  double lambda = 1e-3;
  for (int it = 0; it < 100; ++it) {
    Eigen::Matrix3d h = jac.transpose() * jac;
    const Eigen::Vector3d g = jac.transpose() * r;
    Eigen::Matrix3d hd = h;
    hd.diagonal() *= (1.0 + lambda);
    const Eigen::Vector3d step = hd.ldlt().solve(g);
    const double na = a + step[0], nc = c + step[1], ns = s + step[2];
    if (!(ns > 0.0) || !std::isfinite(na) || !std::isfinite(nc)) {
      lambda *= 10.0;
      continue;
    }
    const double ncost = residuals(na, nc, ns, nullptr, nullptr);
    if (ncost <= cost) {
      const bool done = cost - ncost <= 1e-14 * cost;
      a = na;
      c = nc;
      s = ns;
      cost = residuals(a, c, s, &r, &jac);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (done) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  if (!(s > 0.0) || !(a > 0.0)) return std::nullopt;

  GaussianFit fit;
  fit.amplitude = a;
  fit.center = x0 + c * scale;
  fit.sigma = s * std::abs(scale);
  const double dof = static_cast<double>(n) - 3.0;
  if (dof > 0) {
    const Eigen::Matrix3d cov = (jac.transpose() * jac).inverse() * (cost / dof);
    fit.center_se = std::sqrt(std::max(cov(1, 1), 0.0)) * std::abs(scale);
    fit.sigma_se = std::sqrt(std::max(cov(2, 2), 0.0)) * std::abs(scale);
  }
  return fit;
}

}  // namespace chaosqfc
