#include "spadapt/spikeslab.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <stdexcept>

#include "spadapt/logmath.hpp"
#include "spadapt/rng.hpp"

namespace spadapt {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

double draw_truncated(CounterRng& rng, double y, double n, double radius) {
  const double s = 1.0 / std::sqrt(n);
  const double a = (-radius - y) / s;
  const double b = (radius - y) / s;
  const double fa = 0.5 * std::erfc(-a / kSqrt2);
  const double fb = 0.5 * std::erfc(-b / kSqrt2);
  const double u = fa + (fb - fa) * rng.uniform();
  double z = -kSqrt2 * boost::math::erfc_inv(2.0 * u);
  z = std::clamp(z, a, b);
  return y + s * z;
}

}  // namespace

SpikeSlabPrior SpikeSlabPrior::relaxed(double n, int max_level) {
  SpikeSlabPrior p;
  p.omega = [n](int l) { return std::min(0.5, std::exp2(-l) / std::sqrt(n)); };
  p.max_level = max_level;
  return p;
}

SpikeSlabPrior SpikeSlabPrior::strict(double n, double tau, int max_level) {
  SpikeSlabPrior p;
  p.omega = [n, tau](int l) { return std::min(0.5, std::exp2(-l * (1.0 + tau)) / std::sqrt(n)); };
  p.max_level = max_level;
  return p;
}

bool SpikeSlabPrior::weights_in_range(double n, double b_omega, double delta) const {
  for (int l = 0; l <= max_level; ++l) {
    const double w = omega(l);
    if (w < std::pow(n, -b_omega) || w > std::pow(n, (1.0 - delta) / 2.0) * std::exp2(-l)) {
      return false;
    }
  }
  return true;
}

double log_inclusion_odds(double y, double n, double omega, const Slab& slab) {
  if (!(omega > 0.0 && omega < 1.0)) throw std::domain_error("inclusion_prob: omega must lie in (0, 1)");
  if (!(n > 0.0)) throw std::domain_error("inclusion_prob: n must be positive");
  slab.validate();
  const double prior = std::log(omega) - std::log1p(-omega);
  return prior + slab_log_predictive(y, n, slab) - log_normal_pdf(y, 0.0, 1.0 / n);
}

double inclusion_prob(double y, double n, double omega, const Slab& slab) {
  return logistic(log_inclusion_odds(y, n, omega, slab));
}

SpikeSlabFit fit_spikeslab(const Dataset& data, const SpikeSlabPrior& prior, Exec exec) {
  data.require_kind(ModelKind::white_noise, "spikeslab::fit");
  if (!prior.omega) throw std::invalid_argument("spikeslab::fit: omega is not set");
  const int L = prior.max_level < 0 ? data.max_level : prior.max_level;
  if (L > data.max_level) throw ShapeError("spikeslab::fit: prior max_level exceeds the data's");
  const double prec = data.noise_precision();
  const std::size_t size = data.y.size();
  const std::size_t active = std::size_t{1} << (L + 1);

  SpikeSlabFit fit;
  fit.engine = "spikeslab";
  fit.max_level = L;
  fit.precision = prec;
  fit.slab = prior.slab;
  fit.observed = data.y;
  fit.inclusion.assign(size, 0.0);
  fit.coef_sd.assign(size, 0.0);
  fit.mpm.assign(size, 0);
  fit.coef_mean = MultiscaleVector(data.max_level);

  std::vector<double> omega(L + 1);
  for (int l = 0; l <= L; ++l) omega[l] = prior.omega(l);

  // The scaling coefficient is always kept, with a standard normal prior.
  fit.inclusion[0] = 1.0;
  fit.mpm[0] = 1;
  fit.coef_mean.at_flat(0) = prec * data.y[0] / (prec + 1.0);
  fit.coef_sd[0] = 1.0 / std::sqrt(prec + 1.0);

  auto body = [&](std::size_t j) {
    const int l = node_at(j).level;
    const double y = data.y[j];
    const double lo = log_inclusion_odds(y, prec, omega[l], prior.slab);
    const SlabPosterior c = slab_posterior(y, prec, prior.slab);
    fit.inclusion[j] = logistic(lo);
    fit.coef_mean.at_flat(j) = c.mean;
    fit.coef_sd[j] = c.sd;
    fit.mpm[j] = fit.inclusion[j] >= 0.5 ? 1 : 0;
  };
  const long count = static_cast<long>(active);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long j = 1; j < count; ++j) body(static_cast<std::size_t>(j));
  } else {
    for (long j = 1; j < count; ++j) body(static_cast<std::size_t>(j));
  }
  if (prior.slab.kind == SlabKind::gaussian) {
    fit.coef_var = 1.0 / (prec + 1.0 / (prior.slab.scale * prior.slab.scale));
  }

  MultiscaleVector mean(data.max_level), mpm(data.max_level);
  for (std::size_t j = 0; j < size; ++j) {
    mean.at_flat(j) = fit.inclusion[j] * fit.coef_mean.at_flat(j);
    mpm.at_flat(j) = fit.mpm[j] ? fit.coef_mean.at_flat(j) : 0.0;
  }
  fit.point_estimate = inverse(mean);
  fit.mpm_estimate = inverse(mpm);

  double log_ev = 0.0;
  for (std::size_t j = 1; j < active; ++j) {
    const int l = node_at(j).level;
    const double lo = log_inclusion_odds(data.y[j], prec, omega[l], prior.slab);
    log_ev += std::log1p(-omega[l]) + log_add(0.0, lo);
  }
  fit.log_evidence = log_ev;
  return fit;
}

std::vector<MultiscaleVector> sample_coefficients(const SpikeSlabFit& fit, std::size_t m,
                                                  std::uint64_t seed) {
  const bool uniform = fit.slab.kind == SlabKind::uniform;
  const std::size_t active = std::size_t{1} << (fit.max_level + 1);
  auto draw = [&](std::size_t r) {
    CounterRng rng(seed, r);
    MultiscaleVector beta(fit.coef_mean.max_level());
    beta.at_flat(0) = fit.coef_mean.at_flat(0) + fit.coef_sd[0] * rng.normal();
    for (std::size_t j = 1; j < active; ++j) {
      if (rng.uniform() >= fit.inclusion[j]) continue;
      if (uniform) {
        beta.at_flat(j) = draw_truncated(rng, fit.observed[j], fit.precision, fit.slab.radius);
      } else {
        beta.at_flat(j) = fit.coef_mean.at_flat(j) + fit.coef_sd[j] * rng.normal();
      }
    }
    return beta;
  };
  return run_replicates<MultiscaleVector>(m, draw);
}

}  // namespace spadapt
