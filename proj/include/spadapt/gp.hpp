#pragma once

#include <cstdint>
#include <vector>

#include "spadapt/parallel.hpp"
#include "spadapt/signals.hpp"
#include "spadapt/summary.hpp"

namespace spadapt {

enum class GpVariant { sieve, scale, rate };

std::string to_string(GpVariant v);
GpVariant gp_variant_from_string(const std::string& s);

/// Hierarchical Gaussian prior on Haar coefficients with a discrete
/// hyperprior. sieve: beta_lk ~ N(0, tau^2) for l <= L, 0 deeper, hyper L.
/// scale / rate: beta_lk ~ N(0, tau^2 2^{-l(2 alpha + 1)}), hyper tau or alpha.
/// The scaling coefficient has variance tau^2 throughout.
struct GpPriorSpec {
  GpVariant variant = GpVariant::sieve;
  double tau = 1.0;
  double alpha = 0.5;
  std::vector<double> hyper_values;
  std::vector<double> hyper_weights;

  /// Documented default grids: sieve L in 1..max_level with weight prop. to e^{-L};
  /// scale tau on 41 log-spaced points in [n^{-1/2}, n^{1/2}]; rate alpha in
  /// 0.05, 0.10, ..., 3.00. Scale and rate grids carry uniform weights.
  static GpPriorSpec defaults(GpVariant variant, std::size_t n);
  void validate() const;

  /// Prior variance of coefficient (level, .) under hyper value h.
  double prior_variance(int level, double h) const;
};

struct GpFit : PosteriorSummary {
  GpPriorSpec spec;
  double precision = 0.0;
  std::vector<double> observed;       // Haar coefficients of y
  std::vector<double> log_marginals;  // per hyper value
  std::vector<double> hyper_posterior;
  double hyper_median = 0.0;
  std::size_t eb_index = 0;           // maximizer of the marginal likelihood
  std::vector<double> eb_estimate;    // plug-in fit at the EB hyper value
};

/// Exact conjugate fit on a regular design x_i = i / n, n a power of two.
GpFit fit_conjugate(const Dataset& data, const GpPriorSpec& spec, Exec exec = Exec::parallel);

/// Posterior draws of f on the n-cell grid (hyper value then coefficients).
std::vector<std::vector<double>> sample_gp(const GpFit& fit, std::size_t m, std::uint64_t seed);

struct HalfLosses {
  double full = 0.0;
  double smooth_half = 0.0;  // over [1/2, 1]
};

HalfLosses half_losses(std::span<const double> estimate, const RealFunction& truth);

}  // namespace spadapt
