#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spadapt/parallel.hpp"
#include "spadapt/signals.hpp"
#include "spadapt/summary.hpp"
#include "spadapt/tree.hpp"

namespace spadapt {

/// log of exp(n^2 Y^2 / (2(n + 1))) / sqrt(n + 1): the likelihood factor for
/// making a node internal under a standard normal coefficient prior.
double log_node_lik_ratio(double y, double n);
double node_lik_ratio(double y, double n);

struct BcartFit : PosteriorSummary {
  /// log Z(l, k) of the bottom-up recursion (flat index, wavelet nodes only).
  std::vector<double> log_z;
  /// P(node internal | parent internal, Y).
  std::vector<double> split_cond;
  double precision = 0.0;
};

/// Exact posterior under the Galton-Watson tree prior. prior.max_level must
/// not exceed the data's max_level; a negative value means "use the data's".
BcartFit fit_exact(const Dataset& data, GaltonWatsonPrior prior, Exec exec = Exec::parallel);

/// Exact iid posterior draws by top-down splitting plus Gaussian coefficients.
std::vector<TreeDraw> sample_trees(const BcartFit& fit, std::size_t m, std::uint64_t seed);

/// Exact posterior CDF of the deepest internal level among the ancestors of
/// `node` and its subtree: entry d is P(D <= d), d = -1 .. max_level, shifted by one.
std::vector<double> deepest_level_cdf(const BcartFit& fit, NodeIndex node);
/// Posterior median of that deepest level (-1 when nothing is internal).
int median_deepest_level(const BcartFit& fit, NodeIndex node);

/// Smallest level l with l >= max(log2(1 / (2 eta_lk)), d_l(x)), where
/// d_l(x) = floor(log2(C_l(x) (n / log n)^{1/(2t(x)+1)})) and
/// C_l(x) = (2 M_lk / gamma_bar)^{1/(t(x)+1/2)}, (l, k) the level-l node at x.
int local_depth(const HolderProfile& profile, double n, double gamma_bar, double x);

}  // namespace spadapt
