#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace spadapt {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)), exact for -inf arguments.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

inline double log_sum_exp(std::span<const double> v) {
  double hi = kNegInf;
  for (double x : v) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

/// log(1 - p) for p in [0, 1].
inline double log1m(double p) { return p >= 1.0 ? kNegInf : std::log1p(-p); }

/// Probability from log odds without overflow.
inline double logistic(double log_odds) {
  if (log_odds >= 0) return 1.0 / (1.0 + std::exp(-log_odds));
  const double e = std::exp(log_odds);
  return e / (1.0 + e);
}

/// log of the N(x; mean, var) density.
inline double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * 3.14159265358979323846 * var) + d * d / var);
}

/// log(Phi(b) - Phi(a)) for a < b, stable in both tails.
double log_normal_interval(double a, double b);

}  // namespace spadapt
