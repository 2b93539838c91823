#pragma once

#include <span>
#include <vector>

#include "spadapt/signals.hpp"
#include "spadapt/summary.hpp"

namespace spadapt {

/// Nodes with posterior inclusion >= 1/2, closed under ancestors.
struct MedianTree {
  int max_level = -1;
  std::vector<char> mask;  // flat index, slot 0 (scaling) always set
  /// Nodes dropped because an ancestor fell below the threshold.
  std::size_t repaired = 0;

  bool contains(NodeIndex node) const;
  std::vector<NodeIndex> nodes() const;
};

MedianTree median_tree(std::span<const double> inclusion, int max_level);
MedianTree median_tree(const PosteriorSummary& summary);

/// Raw Y_lk on the tree plus the scaling term, on the data's 2^(L+1) grid.
std::vector<double> median_estimator(const MedianTree& tree, const Dataset& white_noise);
/// Regression variant: the summary's conditional posterior-mean coefficients on the tree.
std::vector<double> median_estimator(const MedianTree& tree, const PosteriorSummary& summary);

/// sigma_n(x) = v_n sqrt(log n / n) sum_l 1{(l, k_l(x)) in tree} |psi_{l,k_l(x)}(x)|.
std::vector<double> local_radius(const MedianTree& tree, double n, double v_n,
                                 std::span<const double> x);

struct Band {
  std::vector<double> x;
  std::vector<double> center;
  std::vector<double> radius;
};

Band make_band(std::vector<double> x, std::vector<double> center, std::vector<double> radius);

struct Containment {
  bool contained = true;
  double worst = 0.0;  // sup |f - center| / radius over points with radius > 0
  std::size_t excluded = 0;
  double excluded_fraction = 0.0;
};

Containment contains(const Band& band, std::span<const double> f);
Containment contains(const Band& band, const RealFunction& f);

struct SelfSimilarityReport {
  bool passed = false;
  double c1_required = 0.0;
  /// Largest admissible c_1 at each grid point and overall.
  std::vector<double> c1_at;
  double c1_min = 0.0;
  /// Smallest |K_j f - f| 2^{j t(x)} over x, per j in [j0, j_max].
  std::vector<double> c1_by_level;
};

/// Checks |K_j f(x) - f(x)| >= c_1 2^{-j t(x)} for j0 <= j <= j_max at the
/// right endpoints of the 2^(max_level + 1) grid on which f is sampled.
SelfSimilarityReport check_self_similarity(const RealFunction& f, const HolderProfile& profile,
                                           double c1, int j0, int j_max, int max_level);

}  // namespace spadapt
