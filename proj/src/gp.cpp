#include "spadapt/gp.hpp"

#include <cmath>
#include <stdexcept>

#include "spadapt/logmath.hpp"
#include "spadapt/metrics.hpp"
#include "spadapt/rng.hpp"

namespace spadapt {

std::string to_string(GpVariant v) {
  switch (v) {
    case GpVariant::sieve: return "sieve";
    case GpVariant::scale: return "scale";
    case GpVariant::rate: return "rate";
  }
  return "?";
}

GpVariant gp_variant_from_string(const std::string& s) {
  if (s == "sieve") return GpVariant::sieve;
  if (s == "scale") return GpVariant::scale;
  if (s == "rate") return GpVariant::rate;
  throw ValidationError("unknown gp variant '" + s + "' (expected sieve, scale or rate)");
}

GpPriorSpec GpPriorSpec::defaults(GpVariant variant, std::size_t n) {
  GpPriorSpec s;
  s.variant = variant;
  const double dn = static_cast<double>(n);
  switch (variant) {
    case GpVariant::sieve: {
      const int top = exact_log2(n) - 1;
      for (int L = 1; L <= top; ++L) {
        s.hyper_values.push_back(L);
        s.hyper_weights.push_back(std::exp(-static_cast<double>(L)));
      }
      break;
    }
    case GpVariant::scale:
      for (int i = 0; i <= 40; ++i) {
        s.hyper_values.push_back(std::pow(dn, -0.5 + i / 40.0));
        s.hyper_weights.push_back(1.0);
      }
      break;
    case GpVariant::rate:
      for (int i = 1; i <= 60; ++i) {
        s.hyper_values.push_back(0.05 * i);
        s.hyper_weights.push_back(1.0);
      }
      break;
  }
  double total = 0.0;
  for (double w : s.hyper_weights) total += w;
  for (double& w : s.hyper_weights) w /= total;
  return s;
}

void GpPriorSpec::validate() const {
  if (hyper_values.empty() || hyper_values.size() != hyper_weights.size()) {
    throw ValidationError("GpPriorSpec: hyper grid and weights must be non-empty and aligned");
  }
  double total = 0.0;
  for (double w : hyper_weights) {
    if (!(w >= 0.0)) throw ValidationError("GpPriorSpec: negative hyper weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("GpPriorSpec: hyper weights must sum to 1");
  if (!(tau > 0.0) || !(alpha > 0.0)) throw ValidationError("GpPriorSpec: tau and alpha must be positive");
  for (double h : hyper_values) {
    if (!(h > 0.0)) throw ValidationError("GpPriorSpec: hyper values must be positive");
  }
}

double GpPriorSpec::prior_variance(int level, double h) const {
  switch (variant) {
    case GpVariant::sieve:
      return level <= static_cast<int>(std::lround(h)) ? tau * tau : 0.0;
    case GpVariant::scale:
      return level < 0 ? h * h : h * h * std::exp2(-level * (2.0 * alpha + 1.0));
    case GpVariant::rate:
      return level < 0 ? tau * tau : tau * tau * std::exp2(-level * (2.0 * h + 1.0));
  }
  return 0.0;
}

GpFit fit_conjugate(const Dataset& data, const GpPriorSpec& spec, Exec exec) {
  const Dataset seq = to_sequence(data);
  spec.validate();
  const double prec = seq.noise_precision();
  const double noise = 1.0 / prec;
  const std::size_t size = seq.y.size();
  const std::size_t H = spec.hyper_values.size();

  GpFit fit;
  fit.engine = "gp";
  fit.spec = spec;
  fit.max_level = seq.max_level;
  fit.precision = prec;
  fit.observed = seq.y;
  fit.log_marginals.assign(H, 0.0);

  std::vector<int> level(size);
  for (std::size_t j = 0; j < size; ++j) level[j] = node_at(j).level;

  auto marginal = [&](std::size_t h) {
    double s = 0.0;
    for (std::size_t j = 0; j < size; ++j) {
      s += log_normal_pdf(seq.y[j], 0.0, spec.prior_variance(level[j], spec.hyper_values[h]) + noise);
    }
    fit.log_marginals[h] = s;
  };
  const long count = static_cast<long>(H);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long h = 0; h < count; ++h) marginal(static_cast<std::size_t>(h));
  } else {
    for (long h = 0; h < count; ++h) marginal(static_cast<std::size_t>(h));
  }

  std::vector<double> logw(H);
  for (std::size_t h = 0; h < H; ++h) {
    logw[h] = (spec.hyper_weights[h] > 0 ? std::log(spec.hyper_weights[h]) : kNegInf) + fit.log_marginals[h];
  }
  const double norm = log_sum_exp(logw);
  fit.log_evidence = norm;
  fit.hyper_posterior.resize(H);
  for (std::size_t h = 0; h < H; ++h) fit.hyper_posterior[h] = std::exp(logw[h] - norm);

  double acc = 0.0;
  fit.hyper_median = spec.hyper_values.back();
  for (std::size_t h = 0; h < H; ++h) {
    acc += fit.hyper_posterior[h];
    if (acc >= 0.5) {
      fit.hyper_median = spec.hyper_values[h];
      break;
    }
  }
  for (std::size_t h = 1; h < H; ++h) {
    if (fit.log_marginals[h] > fit.log_marginals[fit.eb_index]) fit.eb_index = h;
  }

  fit.coef_mean = MultiscaleVector(seq.max_level);
  MultiscaleVector eb(seq.max_level);
  fit.inclusion.assign(size, 0.0);
  for (std::size_t j = 0; j < size; ++j) {
    double m = 0.0;
    double active = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
      const double v = spec.prior_variance(level[j], spec.hyper_values[h]);
      m += fit.hyper_posterior[h] * v / (v + noise) * seq.y[j];
      if (v > 0.0) active += fit.hyper_posterior[h];
    }
    fit.coef_mean.at_flat(j) = m;
    fit.inclusion[j] = active;
    const double v = spec.prior_variance(level[j], spec.hyper_values[fit.eb_index]);
    eb.at_flat(j) = v / (v + noise) * seq.y[j];
  }
  fit.point_estimate = inverse(fit.coef_mean);
  fit.eb_estimate = inverse(eb);
  fit.diagnostics["hyper_median"] = fit.hyper_median;
  fit.diagnostics["eb_hyper"] = spec.hyper_values[fit.eb_index];
  return fit;
}

std::vector<std::vector<double>> sample_gp(const GpFit& fit, std::size_t m, std::uint64_t seed) {
  const double noise = 1.0 / fit.precision;
  auto draw = [&](std::size_t r) {
    CounterRng rng(seed, r);
    const double u = rng.uniform();
    std::size_t h = 0;
    double acc = fit.hyper_posterior[0];
    while (u > acc && h + 1 < fit.hyper_posterior.size()) acc += fit.hyper_posterior[++h];
    const double hv = fit.spec.hyper_values[h];
    MultiscaleVector beta(fit.max_level);
    for (std::size_t j = 0; j < fit.observed.size(); ++j) {
      const double v = fit.spec.prior_variance(node_at(j).level, hv);
      if (v <= 0.0) continue;
      const double shrink = v / (v + noise);
      beta.at_flat(j) = shrink * fit.observed[j] + std::sqrt(shrink * noise) * rng.normal();
    }
    return inverse(beta);
  };
  return run_replicates<std::vector<double>>(m, draw);
}

HalfLosses half_losses(std::span<const double> estimate, const RealFunction& truth) {
  return {l2_loss(estimate, truth, 0.0, 1.0), l2_loss(estimate, truth, 0.5, 1.0)};
}

}  // namespace spadapt
