#include "spadapt/bcart.hpp"

#include <cmath>
#include <functional>

#include "spadapt/logmath.hpp"
#include "spadapt/rng.hpp"

namespace spadapt {

namespace {

// Levels narrower than this run serially even in the parallel variant.
constexpr long kParallelMinWidth = 256;

template <class Body>
void for_level(int level, Exec exec, Body body) {
  const long width = 1L << level;
  const long first = width;
  if (exec == Exec::parallel && width >= kParallelMinWidth) {
#pragma omp parallel for schedule(static)
    for (long j = first; j < first + width; ++j) body(static_cast<std::size_t>(j));
  } else {
    for (long j = first; j < first + width; ++j) body(static_cast<std::size_t>(j));
  }
}

}  // namespace

double log_node_lik_ratio(double y, double n) {
  if (!(n >= 1.0)) throw std::domain_error("node_lik_ratio: n must be >= 1");
  return n * n * y * y / (2.0 * (n + 1.0)) - 0.5 * std::log1p(n);
}

double node_lik_ratio(double y, double n) { return std::exp(log_node_lik_ratio(y, n)); }

BcartFit fit_exact(const Dataset& data, GaltonWatsonPrior prior, Exec exec) {
  data.require_kind(ModelKind::white_noise, "bcart::fit_exact");
  if (prior.max_level < 0) prior.max_level = data.max_level;
  if (prior.max_level > data.max_level) {
    throw ShapeError("bcart::fit_exact: prior max_level exceeds the data's");
  }
  prior.validate();
  const int L = prior.max_level;
  const double prec = data.noise_precision();
  const std::size_t tree_size = std::size_t{1} << (L + 1);
  const std::size_t data_size = data.y.size();
  const std::vector<double>& Y = data.y;

  BcartFit fit;
  fit.engine = "bcart";
  fit.max_level = L;
  fit.precision = prec;
  fit.log_z.assign(tree_size, 0.0);
  fit.split_cond.assign(tree_size, 0.0);
  fit.inclusion.assign(data_size, 0.0);
  fit.inclusion[0] = 1.0;

  std::vector<double> log_p(L + 1), log_q(L + 1);
  for (int l = 0; l <= L; ++l) {
    log_p[l] = prior.log_split_prob(l);
    log_q[l] = prior.log_stop_prob(l);
  }

  for (int l = L; l >= 0; --l) {
    for_level(l, exec, [&](std::size_t j) {
      double grow = log_p[l] + log_node_lik_ratio(Y[j], prec);
      if (l < L) grow += fit.log_z[2 * j] + fit.log_z[2 * j + 1];
      fit.log_z[j] = log_add(log_q[l], grow);
      fit.split_cond[j] = std::exp(grow - fit.log_z[j]);
    });
  }
  fit.log_evidence = fit.log_z[1];

  for (int l = 0; l <= L; ++l) {
    for_level(l, exec, [&](std::size_t j) {
      fit.inclusion[j] = fit.split_cond[j] * (l == 0 ? 1.0 : fit.inclusion[j / 2]);
    });
  }

  const double shrink = prec / (prec + 1.0);
  fit.coef_var = 1.0 / (prec + 1.0);
  fit.coef_mean = MultiscaleVector(data.max_level);
  MultiscaleVector mean(data.max_level);
  for (std::size_t j = 0; j < data_size; ++j) {
    fit.coef_mean.at_flat(j) = shrink * Y[j];
    mean.at_flat(j) = fit.inclusion[j] * fit.coef_mean.at_flat(j);
  }
  fit.point_estimate = inverse(mean);
  return fit;
}

std::vector<TreeDraw> sample_trees(const BcartFit& fit, std::size_t m, std::uint64_t seed) {
  const int L = fit.max_level;
  const double sd = std::sqrt(fit.coef_var);
  auto draw = [&](std::size_t r) {
    CounterRng rng(seed, r);
    TreeDraw d{DyadicTree(L), MultiscaleVector(fit.coef_mean.max_level())};
    d.beta.at_flat(0) = fit.coef_mean.at_flat(0) + sd * rng.normal();
    std::vector<std::size_t> stack{1};
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      if (rng.uniform() >= fit.split_cond[j]) continue;
      const NodeIndex node = node_at(j);
      d.tree.grow(node);
      d.beta.at_flat(j) = fit.coef_mean.at_flat(j) + sd * rng.normal();
      if (node.level < L) {
        stack.push_back(2 * j + 1);
        stack.push_back(2 * j);
      }
    }
    return d;
  };
  return run_replicates<TreeDraw>(m, draw);
}

std::vector<double> deepest_level_cdf(const BcartFit& fit, NodeIndex node) {
  require_valid(node);
  const int L = fit.max_level;
  if (node.level < 0 || node.level > L) {
    throw std::domain_error("deepest_level_cdf: node outside the tree levels");
  }
  // P(no internal node deeper than d in the subtree of j | parent of j internal).
  std::function<double(std::size_t, int, int)> subtree_ok = [&](std::size_t j, int level, int d) {
    if (level > L) return 1.0;
    const double s = fit.split_cond[j];
    if (level > d) return 1.0 - s;
    return (1.0 - s) + s * subtree_ok(2 * j, level + 1, d) * subtree_ok(2 * j + 1, level + 1, d);
  };
  const std::size_t jv = flat_index(node);
  std::vector<double> cdf(static_cast<std::size_t>(L) + 2);
  for (int d = -1; d <= L; ++d) {
    double p;
    if (d < node.level) {
      const NodeIndex anc{d + 1, node.k >> (node.level - d - 1)};
      p = 1.0 - fit.inclusion_at(anc);
    } else {
      const double inc = fit.inclusion[jv];
      p = 1.0 - inc;
      if (node.level < L) {
        p += inc * subtree_ok(2 * jv, node.level + 1, d) * subtree_ok(2 * jv + 1, node.level + 1, d);
      } else {
        p += inc;
      }
    }
    cdf[static_cast<std::size_t>(d + 1)] = p;
  }
  return cdf;
}

int median_deepest_level(const BcartFit& fit, NodeIndex node) {
  const std::vector<double> cdf = deepest_level_cdf(fit, node);
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    if (cdf[i] >= 0.5) return static_cast<int>(i) - 1;
  }
  return fit.max_level;
}

int local_depth(const HolderProfile& profile, double n, double gamma_bar, double x) {
  if (!(n >= 2.0)) throw std::domain_error("local_depth: n must be >= 2");
  if (!(gamma_bar > 0.0)) throw std::domain_error("local_depth: gamma_bar must be positive");
  const double t = profile.t(x);
  const double growth = std::log2(n / std::log(n)) / (2.0 * t + 1.0);
  for (int l = 0; l < 62; ++l) {
    const DyadicInterval I = interval_of({l, locate(l, x)});
    const double c = std::log2(2.0 * profile.M_max(I) / gamma_bar) / (t + 0.5);
    const double d = std::floor(c + growth + 1e-12);
    const double floor_level = std::log2(1.0 / (2.0 * profile.eta_min(I)));
    if (l >= std::max(floor_level, d)) return l;
  }
  return 62;
}

}  // namespace spadapt
