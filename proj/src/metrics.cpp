#include "spadapt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spadapt {

double local_rate(double n, double t) {
  return std::pow(n / std::log(n), -t / (2.0 * t + 1.0));
}

double sup_loss(std::span<const double> estimate, const RealFunction& truth,
                const HolderProfile& profile, double n) {
  const double cells = static_cast<double>(estimate.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double x = static_cast<double>(i + 1) / cells;
    const double err = std::abs(estimate[i] - truth(x));
    worst = std::max(worst, err / local_rate(n, profile.t(x)));
  }
  return worst;
}

double sup_error(std::span<const double> estimate, const RealFunction& truth, double lo,
                 double hi) {
  const double cells = static_cast<double>(estimate.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double x = static_cast<double>(i + 1) / cells;
    if (x <= lo || x > hi) continue;
    worst = std::max(worst, std::abs(estimate[i] - truth(x)));
  }
  return worst;
}

double l2_loss(std::span<const double> estimate, const RealFunction& truth, double lo, double hi,
               int oversample) {
  if (oversample < 1) throw std::invalid_argument("l2_loss: oversample must be >= 1");
  const double cells = static_cast<double>(estimate.size());
  const double h = 1.0 / (cells * oversample);
  double s = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    for (int j = 0; j < oversample; ++j) {
      const double x = (static_cast<double>(i) + (j + 0.5) / oversample) / cells;
      if (x <= lo || x > hi) continue;
      const double d = estimate[i] - truth(x);
      s += d * d * h;
    }
  }
  return std::sqrt(s);
}

SlopeFit loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope: need two or more paired points");
  }
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]);
    const double b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    syy += b * b;
  }
  const double vx = sxx - sx * sx / m;
  const double vy = syy - sy * sy / m;
  const double cxy = sxy - sx * sy / m;
  SlopeFit fit;
  fit.slope = cxy / vx;
  fit.intercept = (sy - fit.slope * sx) / m;
  fit.r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
  return fit;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace spadapt
