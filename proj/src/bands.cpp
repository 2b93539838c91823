#include "spadapt/bands.hpp"

#include <cmath>
#include <stdexcept>

namespace spadapt {

bool MedianTree::contains(NodeIndex node) const {
  if (node.level < 0) return true;
  if (node.level > max_level) return false;
  return mask[flat_index(node)] != 0;
}

std::vector<NodeIndex> MedianTree::nodes() const {
  std::vector<NodeIndex> out;
  for (std::size_t j = 1; j < mask.size(); ++j) {
    if (mask[j]) out.push_back(node_at(j));
  }
  return out;
}

MedianTree median_tree(std::span<const double> inclusion, int max_level) {
  const std::size_t size = std::size_t{1} << (max_level + 1);
  if (inclusion.size() < size) throw ShapeError("median_tree: inclusion map is incomplete");
  MedianTree t;
  t.max_level = max_level;
  t.mask.assign(size, 0);
  t.mask[0] = 1;
  for (std::size_t j = 1; j < size; ++j) {
    if (inclusion[j] < 0.5) continue;
    if (j == 1 || t.mask[j / 2]) {
      t.mask[j] = 1;
    } else {
      ++t.repaired;
    }
  }
  return t;
}

MedianTree median_tree(const PosteriorSummary& summary) {
  return median_tree(summary.inclusion, summary.max_level);
}

std::vector<double> median_estimator(const MedianTree& tree, const Dataset& white_noise) {
  white_noise.require_kind(ModelKind::white_noise, "median_estimator");
  MultiscaleVector beta(white_noise.max_level);
  const std::size_t size = std::min(tree.mask.size(), beta.size());
  for (std::size_t j = 0; j < size; ++j) {
    if (tree.mask[j]) beta.at_flat(j) = white_noise.y[j];
  }
  return inverse(beta);
}

std::vector<double> median_estimator(const MedianTree& tree, const PosteriorSummary& summary) {
  MultiscaleVector beta(summary.coef_mean.max_level());
  const std::size_t size = std::min(tree.mask.size(), beta.size());
  for (std::size_t j = 0; j < size; ++j) {
    if (tree.mask[j]) beta.at_flat(j) = summary.coef_mean.at_flat(j);
  }
  return inverse(beta);
}

std::vector<double> local_radius(const MedianTree& tree, double n, double v_n,
                                 std::span<const double> x) {
  if (!(v_n > 0.0)) throw std::domain_error("local_radius: v_n must be positive");
  const double scale = v_n * std::sqrt(std::log(n) / n);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0.0;
    for (int l = 0; l <= tree.max_level; ++l) {
      const NodeIndex node{l, locate(l, x[i])};
      if (!tree.contains(node)) break;
      s += std::exp2(0.5 * l);
    }
    out[i] = scale * s;
  }
  return out;
}

Band make_band(std::vector<double> x, std::vector<double> center, std::vector<double> radius) {
  if (x.size() != center.size() || x.size() != radius.size()) {
    throw ShapeError("make_band: x, center and radius lengths differ");
  }
  return Band{std::move(x), std::move(center), std::move(radius)};
}

Containment contains(const Band& band, std::span<const double> f) {
  if (f.size() != band.center.size()) throw ShapeError("contains: length mismatch");
  Containment c;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(band.radius[i] > 0.0)) {
      ++c.excluded;
      continue;
    }
    c.worst = std::max(c.worst, std::abs(f[i] - band.center[i]) / band.radius[i]);
  }
  c.contained = c.worst <= 1.0;
  c.excluded_fraction = f.empty() ? 0.0 : static_cast<double>(c.excluded) / static_cast<double>(f.size());
  return c;
}

Containment contains(const Band& band, const RealFunction& f) {
  std::vector<double> v(band.x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(band.x[i]);
  return contains(band, v);
}

SelfSimilarityReport check_self_similarity(const RealFunction& f, const HolderProfile& profile,
                                           double c1, int j0, int j_max, int max_level) {
  if (j0 < 0 || j_max < j0 || j_max > max_level) {
    throw std::invalid_argument("check_self_similarity: need 0 <= j0 <= j_max <= max_level");
  }
  const std::size_t cells = std::size_t{1} << (max_level + 1);
  const std::vector<double> samples = sample_on_grid(f, cells);
  const MultiscaleVector beta = forward(samples);
  const std::vector<double> x = grid_points(cells);
  SelfSimilarityReport rep;
  rep.c1_required = c1;
  rep.c1_at.assign(cells, INFINITY);
  rep.c1_by_level.assign(static_cast<std::size_t>(j_max - j0 + 1), INFINITY);
  for (int j = j0; j <= j_max; ++j) {
    const std::vector<double> kj = project_level(beta, j);
    for (std::size_t i = 0; i < cells; ++i) {
      const double v = std::abs(kj[i] - samples[i]) * std::exp2(j * profile.t(x[i]));
      rep.c1_at[i] = std::min(rep.c1_at[i], v);
      rep.c1_by_level[static_cast<std::size_t>(j - j0)] =
          std::min(rep.c1_by_level[static_cast<std::size_t>(j - j0)], v);
    }
  }
  rep.c1_min = INFINITY;
  for (double v : rep.c1_at) rep.c1_min = std::min(rep.c1_min, v);
  rep.passed = c1 > 0.0 && rep.c1_min >= c1;
  return rep;
}

}  // namespace spadapt
