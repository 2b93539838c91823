#pragma once

#include <span>
#include <vector>

#include "spadapt/signals.hpp"

namespace spadapt {

/// Local minimax rate (n / log n)^{-t / (2t + 1)}.
double local_rate(double n, double t);

/// sup over the right endpoints of the estimate's grid of
/// |estimate(x) - truth(x)| / local_rate(n, t(x)).
double sup_loss(std::span<const double> estimate, const RealFunction& truth,
                const HolderProfile& profile, double n);

/// Unnormalized sup-norm error over grid points with x in (lo, hi].
double sup_error(std::span<const double> estimate, const RealFunction& truth, double lo = 0.0,
                 double hi = 1.0);

/// L2 distance on (lo, hi] between a step function on an N-cell grid and the
/// truth, evaluated at `oversample` midpoints per cell.
double l2_loss(std::span<const double> estimate, const RealFunction& truth, double lo = 0.0,
               double hi = 1.0, int oversample = 4);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares fit of log y on log x.
SlopeFit loglog_slope(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);

}  // namespace spadapt
