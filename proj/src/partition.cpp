#include "spadapt/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "spadapt/logmath.hpp"
#include "spadapt/metrics.hpp"
#include "spadapt/rng.hpp"

namespace spadapt {

std::size_t KnotGrid::cell_of(double x) const {
  const auto it = std::lower_bound(z.begin(), z.end(), x);
  const auto c = static_cast<std::size_t>(it - z.begin());
  return std::clamp<std::size_t>(c, 1, cells());
}

void KnotGrid::record_spacing(std::size_t n) {
  if (n < 2) return;
  const double unit = std::log(static_cast<double>(n)) / static_cast<double>(n);
  c_lower = INFINITY;
  c_upper = 0.0;
  for (std::size_t l = 1; l < z.size(); ++l) {
    const double gap = (z[l] - z[l - 1]) / unit;
    c_lower = std::min(c_lower, gap);
    c_upper = std::max(c_upper, gap);
  }
}

KnotGrid order_statistic_grid(std::span<const double> sorted_x, double C) {
  const std::size_t n = sorted_x.size();
  if (n == 0) throw ShapeError("order_statistic_grid: empty design");
  if (!std::is_sorted(sorted_x.begin(), sorted_x.end())) {
    throw ShapeError("order_statistic_grid: design must be sorted");
  }
  const auto step = static_cast<std::size_t>(
      std::max(1.0, std::ceil(C * std::log(static_cast<double>(std::max<std::size_t>(n, 2))))));
  KnotGrid g;
  g.z.push_back(0.0);
  std::vector<std::size_t> at;
  for (std::size_t m = step; m < n; m += step) {
    const double v = sorted_x[m - 1];
    if (v > g.z.back() && v < 1.0) {
      g.z.push_back(v);
      at.push_back(m);
    }
  }
  if (!at.empty() && 2 * (n - at.back()) < step) g.z.pop_back();
  g.z.push_back(1.0);
  g.record_spacing(n);
  return g;
}

KnotGrid regular_grid(std::size_t cells, std::size_t n) {
  if (cells == 0) throw ShapeError("regular_grid: need at least one cell");
  KnotGrid g;
  g.z.resize(cells + 1);
  for (std::size_t l = 0; l <= cells; ++l) g.z[l] = static_cast<double>(l) / static_cast<double>(cells);
  g.record_spacing(n);
  return g;
}

SegmentData::SegmentData(const KnotGrid& grid, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("SegmentData: x and y lengths differ");
  if (!std::is_sorted(x.begin(), x.end())) throw ShapeError("SegmentData: design must be sorted");
  const std::size_t n = x.size();
  // Centering keeps the prefix-sum residuals accurate.
  const double shift = n ? std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n) : 0.0;
  std::vector<double> s(n + 1, 0.0), ss(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - shift;
    s[i + 1] = s[i] + d;
    ss[i + 1] = ss[i] + d * d;
  }
  const std::size_t K = grid.z.size();
  count_.assign(K, 0);
  sum_.assign(K, 0.0);
  sumsq_.assign(K, 0.0);
  for (std::size_t l = 1; l < K; ++l) {
    const auto m = l + 1 == K ? n
                              : static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), grid.z[l]) - x.begin());
    count_[l] = static_cast<long>(m);
    sum_[l] = s[m];
    sumsq_[l] = ss[m];
  }
  shift_ = shift;
}

SegmentData::Stats SegmentData::stats(std::size_t i, std::size_t j) const {
  Stats st;
  st.count = count_[j] - count_[i];
  if (st.count <= 0) return st;
  const double c = static_cast<double>(st.count);
  const double s = sum_[j] - sum_[i];
  st.mean = s / c + shift_;
  st.rss = std::max(0.0, (sumsq_[j] - sumsq_[i]) - s * s / c);
  return st;
}

double segment_log_marginal(const SegmentData::Stats& stats, const Slab& slab) {
  if (stats.count <= 0) throw std::domain_error("segment_log_marginal: empty segment");
  const double c = static_cast<double>(stats.count);
  return -0.5 * stats.rss + 0.5 * std::log(2.0 * std::numbers::pi / c) +
         slab_log_predictive(stats.mean, c, slab);
}

double PartitionPrior::log_size(const KnotGrid& grid, std::size_t i, std::size_t j) const {
  const double size = this->size == SizeMeasure::length ? grid.z[j] - grid.z[i]
                                                        : static_cast<double>(j - i);
  return B * std::log(size);
}

std::vector<double> PartitionFit::on_grid(std::size_t cells) const {
  std::vector<double> out(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    out[i] = evaluate(static_cast<double>(i + 1) / static_cast<double>(cells));
  }
  return out;
}

PartitionFit fit_dp(const Dataset& data, const KnotGrid& grid, const PartitionPrior& prior,
                    Exec exec) {
  data.require_kind(ModelKind::regression, "partition::fit_dp");
  if (!(prior.B > 0.0)) throw std::domain_error("partition::fit_dp: B must be positive");
  prior.slab.validate();
  if (grid.z.size() < 2 || grid.z.front() != 0.0 || grid.z.back() != 1.0) {
    throw ShapeError("partition::fit_dp: grid must run from 0 to 1");
  }
  std::vector<std::size_t> order(data.n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.design[a] < data.design[b]; });
  std::vector<double> xs(data.n), ys(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    xs[i] = data.design[order[i]];
    ys[i] = data.y[order[i]];
  }
  const SegmentData seg(grid, xs, ys);
  const std::size_t K = grid.z.size();
  const std::size_t N = K - 1;

  PartitionFit fit;
  fit.grid = grid;
  fit.prior = prior;
  fit.log_weight.assign(K * K, kNegInf);
  std::vector<double> post_mean(K * K, 0.0);

  auto row = [&](std::size_t i) {
    for (std::size_t j = i + 1; j < K; ++j) {
      const SegmentData::Stats st = seg.stats(i, j);
      if (st.count <= 0) continue;
      fit.log_weight[i * K + j] = prior.log_size(grid, i, j) + segment_log_marginal(st, prior.slab);
      post_mean[i * K + j] = slab_posterior(st.mean, static_cast<double>(st.count), prior.slab).mean;
    }
  };
  const long rows = static_cast<long>(N);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < rows; ++i) row(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < rows; ++i) row(static_cast<std::size_t>(i));
  }

  std::vector<double> terms(K);
  fit.log_forward.assign(K, kNegInf);
  fit.log_forward[0] = 0.0;
  for (std::size_t j = 1; j < K; ++j) {
    for (std::size_t i = 0; i < j; ++i) terms[i] = fit.log_forward[i] + fit.log_weight[i * K + j];
    fit.log_forward[j] = log_sum_exp(std::span<const double>(terms.data(), j));
  }
  std::vector<double> backward(K, kNegInf);
  backward[N] = 0.0;
  for (std::size_t i = N; i-- > 0;) {
    for (std::size_t j = i + 1; j < K; ++j) terms[j - i - 1] = fit.log_weight[i * K + j] + backward[j];
    backward[i] = log_sum_exp(std::span<const double>(terms.data(), N - i));
  }
  fit.log_normalizer = fit.log_forward[N];
  if (!std::isfinite(fit.log_normalizer)) {
    throw ValidationError("partition::fit_dp: no partition has observations in every segment");
  }

  fit.segment_prob.assign(K * K, 0.0);
  std::vector<double> diff(K + 1, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < K; ++j) {
      const double w = fit.log_weight[i * K + j];
      if (w == kNegInf) continue;
      const double p = std::exp(fit.log_forward[i] + w + backward[j] - fit.log_normalizer);
      fit.segment_prob[i * K + j] = p;
      fit.expected_segments += p;
      diff[i] += p * post_mean[i * K + j];
      diff[j] -= p * post_mean[i * K + j];
    }
  }
  fit.cell_estimate.assign(N, 0.0);
  double run = 0.0;
  for (std::size_t c = 0; c < N; ++c) {
    run += diff[c];
    fit.cell_estimate[c] = run;
  }

  std::vector<double> best(K, kNegInf);
  std::vector<std::size_t> from(K, 0);
  best[0] = 0.0;
  for (std::size_t j = 1; j < K; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double v = best[i] + fit.log_weight[i * K + j];
      if (v > best[j]) {
        best[j] = v;
        from[j] = i;
      }
    }
  }
  for (std::size_t j = N;; j = from[j]) {
    fit.map_breaks.push_back(j);
    if (j == 0) break;
  }
  std::reverse(fit.map_breaks.begin(), fit.map_breaks.end());

  fit.fitted.resize(data.n);
  for (std::size_t i = 0; i < data.n; ++i) fit.fitted[i] = fit.evaluate(data.design[i]);
  return fit;
}

std::vector<std::vector<std::size_t>> sample_partitions(const PartitionFit& fit, std::size_t m,
                                                        std::uint64_t seed) {
  const std::size_t K = fit.grid.z.size();
  auto draw = [&](std::size_t r) {
    CounterRng rng(seed, r);
    std::vector<std::size_t> breaks{K - 1};
    std::size_t j = K - 1;
    while (j > 0) {
      const double u = rng.uniform();
      double acc = 0.0;
      std::size_t pick = 0;
      for (std::size_t i = j; i-- > 0;) {
        const double w = fit.log_weight[i * K + j];
        if (w == kNegInf) continue;
        acc += std::exp(fit.log_forward[i] + w - fit.log_forward[j]);
        pick = i;
        if (u < acc) break;
      }
      breaks.push_back(pick);
      j = pick;
    }
    std::reverse(breaks.begin(), breaks.end());
    return breaks;
  };
  return run_replicates<std::vector<std::size_t>>(m, draw);
}

double rate_diag(const PartitionFit& fit, const RealFunction& truth, const HolderProfile& profile,
                 std::size_t n) {
  return sup_loss(fit.on_grid(n), truth, profile, static_cast<double>(n));
}

}  // namespace spadapt
