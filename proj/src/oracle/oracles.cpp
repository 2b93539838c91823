#include "oracle/oracles.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "spadapt/bcart.hpp"
#include "spadapt/logmath.hpp"

namespace spadapt::oracle {

NodePosterior enumerate_bcart(const Dataset& data, const GaltonWatsonPrior& prior) {
  const int L = prior.max_level;
  const double prec = data.noise_precision();
  const std::vector<DyadicTree> trees = enumerate_trees(L);
  std::vector<double> logw(trees.size());
  for (std::size_t t = 0; t < trees.size(); ++t) {
    double w = prior.log_prior(trees[t]);
    for (NodeIndex node : trees[t].internal_nodes()) {
      const double y = data.y[flat_index(node)];
      w += std::log(std::exp(prec * prec * y * y / (2.0 * (prec + 1.0))) / std::sqrt(prec + 1.0));
    }
    logw[t] = w;
  }
  NodePosterior out;
  out.log_normalizer = log_sum_exp(logw);
  const std::size_t size = std::size_t{1} << (L + 1);
  out.inclusion.assign(size, 0.0);
  out.inclusion[0] = 1.0;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const double p = std::exp(logw[t] - out.log_normalizer);
    for (NodeIndex node : trees[t].internal_nodes()) out.inclusion[flat_index(node)] += p;
  }
  return out;
}

NodePosterior enumerate_spikeslab(const Dataset& data, const SpikeSlabPrior& prior) {
  const int L = prior.max_level < 0 ? data.max_level : prior.max_level;
  const double prec = data.noise_precision();
  const std::size_t nodes = (std::size_t{1} << (L + 1)) - 1;
  if (nodes > 20) throw std::invalid_argument("enumerate_spikeslab: too many nodes");
  std::vector<double> log_in(nodes + 1), log_out(nodes + 1), log_null(nodes + 1), cond_mean(nodes + 1);
  for (std::size_t j = 1; j <= nodes; ++j) {
    const double w = prior.omega(node_at(j).level);
    const double y = data.y[j];
    double slab;
    if (prior.slab.kind == SlabKind::gaussian) {
      const double v = prior.slab.scale * prior.slab.scale + 1.0 / prec;
      slab = -0.5 * std::log(2.0 * std::numbers::pi * v) - y * y / (2.0 * v);
      cond_mean[j] = y * prec / (prec + 1.0 / (prior.slab.scale * prior.slab.scale));
    } else {
      const double s = std::sqrt(prec);
      const double R = prior.slab.radius;
      const double mass = 0.5 * (std::erf(s * (R - y) / std::numbers::sqrt2) -
                                 std::erf(s * (-R - y) / std::numbers::sqrt2));
      slab = std::log(mass / (2.0 * R));
      cond_mean[j] = std::nan("");
    }
    const double null = 0.5 * std::log(prec / (2.0 * std::numbers::pi)) - 0.5 * prec * y * y;
    log_in[j] = std::log(w) + slab;
    log_out[j] = std::log1p(-w) + null;
    log_null[j] = null;
  }
  double null_total = 0.0;
  for (std::size_t j = 1; j <= nodes; ++j) null_total += log_null[j];
  const std::size_t subsets = std::size_t{1} << nodes;
  std::vector<double> logw(subsets);
  for (std::size_t s = 0; s < subsets; ++s) {
    double w = 0.0;
    for (std::size_t j = 1; j <= nodes; ++j) w += (s >> (j - 1)) & 1U ? log_in[j] : log_out[j];
    logw[s] = w;
  }
  NodePosterior out;
  const double norm = log_sum_exp(logw);
  out.log_normalizer = norm - null_total;  // relative to the likelihood at beta = 0
  out.inclusion.assign(nodes + 1, 0.0);
  out.mean.assign(nodes + 1, 0.0);
  out.inclusion[0] = 1.0;
  for (std::size_t s = 0; s < subsets; ++s) {
    const double p = std::exp(logw[s] - norm);
    for (std::size_t j = 1; j <= nodes; ++j) {
      if ((s >> (j - 1)) & 1U) {
        out.inclusion[j] += p;
        out.mean[j] += p * cond_mean[j];
      }
    }
  }
  return out;
}

double direct_segment_log_marginal(const std::vector<double>& y, const Slab& slab) {
  const double n = static_cast<double>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  double rss = 0.0;
  for (double v : y) rss += (v - mean) * (v - mean);
  double integral;
  if (slab.kind == SlabKind::gaussian) {
    const double s2 = slab.scale * slab.scale;
    integral = std::exp(-0.5 * n * mean * mean / (1.0 + n * s2)) / std::sqrt(1.0 + n * s2);
    return -0.5 * rss + std::log(integral);
  }
  const double R = slab.radius;
  const double s = std::sqrt(n);
  const double mass = 0.5 * (std::erf(s * (R - mean) / std::numbers::sqrt2) -
                             std::erf(s * (-R - mean) / std::numbers::sqrt2));
  integral = std::sqrt(2.0 * std::numbers::pi / n) * mass / (2.0 * R);
  return -0.5 * rss + std::log(integral);
}

PartitionPosterior enumerate_partitions(const Dataset& data, const KnotGrid& grid,
                                        const PartitionPrior& prior) {
  const std::size_t K = grid.z.size();
  const std::size_t N = K - 1;
  if (N > 16) throw std::invalid_argument("enumerate_partitions: grid too large");
  // Raw observations per grid cell.
  std::vector<std::vector<double>> cell(N + 1);
  for (std::size_t i = 0; i < data.n; ++i) cell[grid.cell_of(data.design[i])].push_back(data.y[i]);
  auto segment = [&](std::size_t a, std::size_t b) {
    std::vector<double> ys;
    for (std::size_t c = a + 1; c <= b; ++c) ys.insert(ys.end(), cell[c].begin(), cell[c].end());
    if (ys.empty()) return kNegInf;
    const double size = prior.size == SizeMeasure::length ? grid.z[b] - grid.z[a]
                                                          : static_cast<double>(b - a);
    return prior.B * std::log(size) + direct_segment_log_marginal(ys, prior.slab);
  };
  const std::size_t masks = std::size_t{1} << (N - 1);
  std::vector<double> logw(masks);
  std::vector<std::vector<std::size_t>> parts(masks);
  for (std::size_t m = 0; m < masks; ++m) {
    std::vector<std::size_t> br{0};
    for (std::size_t i = 1; i < N; ++i) {
      if ((m >> (i - 1)) & 1U) br.push_back(i);
    }
    br.push_back(N);
    double w = 0.0;
    for (std::size_t s = 1; s < br.size(); ++s) w += segment(br[s - 1], br[s]);
    logw[m] = w;
    parts[m] = std::move(br);
  }
  PartitionPosterior out;
  out.partitions = masks;
  out.log_normalizer = log_sum_exp(logw);
  out.segment_prob.assign(K * K, 0.0);
  for (std::size_t m = 0; m < masks; ++m) {
    const double p = std::exp(logw[m] - out.log_normalizer);
    for (std::size_t s = 1; s < parts[m].size(); ++s) {
      out.segment_prob[parts[m][s - 1] * K + parts[m][s]] += p;
      out.expected_segments += p;
    }
  }
  return out;
}

double quadrature_log_marginal(const WaveletDesign& design, const DyadicTree& tree,
                               const std::vector<double>& y, double g) {
  std::vector<NodeIndex> cols{{-1, 0}};
  for (NodeIndex node : tree.internal_nodes()) cols.push_back(node);
  const auto n = static_cast<Eigen::Index>(design.n());
  const auto k = static_cast<Eigen::Index>(cols.size());
  if (k > 3) throw std::invalid_argument("quadrature_log_marginal: at most three columns");
  Eigen::MatrixXd X(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < k; ++c) X(i, c) = design.value(static_cast<std::size_t>(i), cols[c]);
  }
  const Eigen::Map<const Eigen::VectorXd> Y(y.data(), n);
  const Eigen::MatrixXd XtX = X.transpose() * X;
  const Eigen::MatrixXd XtX_inv = XtX.inverse();
  const double log_det_prior_cov = std::log((g * XtX_inv).determinant());
  const Eigen::VectorXd ls = XtX_inv * (X.transpose() * Y);
  const double c = g / (g + 1.0);

  auto log_integrand = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd r = Y - X * b;
    const double lik = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) - 0.5 * r.squaredNorm();
    const double pri = -0.5 * static_cast<double>(k) * std::log(2.0 * std::numbers::pi) -
                       0.5 * log_det_prior_cov - 0.5 * b.dot(XtX * b) / g;
    return lik + pri;
  };
  const Eigen::VectorXd centre = c * ls;
  const double shift = log_integrand(centre);
  Eigen::VectorXd half(k);
  for (Eigen::Index i = 0; i < k; ++i) half[i] = 12.0 * std::sqrt(XtX_inv(i, i));

  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double tol = 1e-12;
  Eigen::VectorXd b = centre;
  std::function<double(Eigen::Index)> integrate = [&](Eigen::Index dim) -> double {
    if (dim == k) return std::exp(log_integrand(b) - shift);
    return GK::integrate(
        [&](double v) {
          b[dim] = v;
          return integrate(dim + 1);
        },
        centre[dim] - half[dim], centre[dim] + half[dim], 15, tol);
  };
  return shift + std::log(integrate(0));
}

std::map<std::string, double> enumerate_tree_posterior(const WaveletDesign& design,
                                                       const std::vector<double>& y,
                                                       const GaltonWatsonPrior& prior,
                                                       const GPriorSpec& gspec) {
  const std::vector<DyadicTree> trees = enumerate_trees(prior.max_level);
  std::vector<double> logw;
  std::vector<std::string> keys;
  for (const DyadicTree& t : trees) {
    const double lp = prior.log_prior(t);
    if (lp == kNegInf) continue;
    logw.push_back(lp + log_marginal(design, t, y, gspec));
    keys.push_back(t.key());
  }
  const double norm = log_sum_exp(logw);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < keys.size(); ++i) out[keys[i]] = std::exp(logw[i] - norm);
  return out;
}

}  // namespace spadapt::oracle
