#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "spadapt/parallel.hpp"
#include "spadapt/signals.hpp"
#include "spadapt/slab.hpp"
#include "spadapt/summary.hpp"

namespace spadapt {

struct SpikeSlabPrior {
  std::function<double(int)> omega;
  Slab slab;
  int max_level = -1;

  /// omega_l = min(1/2, n^{-1/2} 2^{-l}); the module default.
  static SpikeSlabPrior relaxed(double n, int max_level = -1);
  /// omega_l = min(1/2, n^{-1/2} 2^{-l(1 + tau)}).
  static SpikeSlabPrior strict(double n, double tau, int max_level = -1);

  /// n^{-b_omega} <= omega_l <= n^{(1-delta)/2} 2^{-l} for 0 <= l <= max_level.
  bool weights_in_range(double n, double b_omega, double delta) const;
};

/// Posterior log odds of inclusion for a single coefficient.
double log_inclusion_odds(double y, double n, double omega, const Slab& slab);
double inclusion_prob(double y, double n, double omega, const Slab& slab = {});

struct SpikeSlabFit : PosteriorSummary {
  /// Conditional posterior standard deviation given inclusion, per node.
  std::vector<double> coef_sd;
  /// Median probability model: nodes with inclusion >= 1/2.
  std::vector<char> mpm;
  std::vector<double> mpm_estimate;
  double precision = 0.0;
  Slab slab;
  std::vector<double> observed;
};

SpikeSlabFit fit_spikeslab(const Dataset& data, const SpikeSlabPrior& prior,
                           Exec exec = Exec::parallel);

/// Independent draws of the coefficient vector from the factorized posterior.
std::vector<MultiscaleVector> sample_coefficients(const SpikeSlabFit& fit, std::size_t m,
                                                  std::uint64_t seed);

}  // namespace spadapt
