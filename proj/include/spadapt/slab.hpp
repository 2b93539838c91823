#pragma once

namespace spadapt {

enum class SlabKind { gaussian, uniform };

/// Coefficient prior: N(0, scale^2) or uniform on [-radius, radius].
struct Slab {
  SlabKind kind = SlabKind::gaussian;
  double scale = 1.0;
  double radius = 1.0;

  void validate() const;
};

/// log of the integral of N(y; beta, 1/precision) g(beta) d beta.
double slab_log_predictive(double y, double precision, const Slab& slab);

struct SlabPosterior {
  double mean = 0.0;
  double sd = 0.0;
};

/// Posterior of beta given y ~ N(beta, 1/precision) and beta ~ slab.
SlabPosterior slab_posterior(double y, double precision, const Slab& slab);

}  // namespace spadapt
