#include "verify/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spadapt/bands.hpp"
#include "spadapt/bcart.hpp"
#include "spadapt/gp.hpp"
#include "spadapt/metrics.hpp"
#include "spadapt/parallel.hpp"
#include "spadapt/partition.hpp"
#include "spadapt/rng.hpp"
#include "spadapt/spikeslab.hpp"

namespace spadapt::verify {
namespace {

const std::vector<std::size_t> kRateSizes{512, 1024, 2048, 4096, 8192, 16384};

std::uint64_t replicate_seed(const VerifyOptions& o, std::uint64_t tag, std::size_t n, std::size_t r) {
  return derive_seed(derive_seed(derive_seed(o.seed, tag), n), r);
}

double mean_over(std::span<const double> v, std::span<const double> x, bool left) {
  double s = 0.0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if ((x[i] <= 0.5) == left) {
      s += v[i];
      ++c;
    }
  }
  return c ? s / double(c) : 0.0;
}

// Self-similar truth with t = 1 everywhere.
// Continuous t = 1 truth: three cusps M |x - a|. The Haar-synthesized t = 1
// function jumps at dyadic points, which knot grids off the dyadics cannot track.
SynthFunction smooth_truth() {
  return synth_holder(HolderProfile::constant(1.0, 4.0, 0.5), CuspRecipe{{0.3, 0.5, 0.77}});
}

// Rough (t = 0.4) on [0, 1/2), smooth (t = 1) on [1/2, 1].
HolderProfile spatial_profile() { return HolderProfile::piecewise(0.4, 1.0, 0.5, 1.0, 0.5); }

}  // namespace

void rate_slopes(const VerifyOptions& o, CriterionResult& result) {
  const SynthFunction truth = smooth_truth();
  const std::vector<std::string> engines{"bcart", "spikeslab", "partition"};
  const std::size_t reps = 30;
  std::vector<std::vector<double>> medians(engines.size());
  for (std::size_t n : kRateSizes) {
    const auto losses = run_replicates<std::vector<double>>(reps, [&](std::size_t r) {
      const Dataset d = simulate(truth.f, ModelKind::regression, n, 1.0, replicate_seed(o, 7, n, r));
      const Dataset wn = to_sequence(d);
      std::vector<double> out;
      const BcartFit bc = fit_exact(wn, GaltonWatsonPrior{4.0, SplitDecay::linear, -1}, Exec::serial);
      out.push_back(sup_error(bc.point_estimate, truth.f));
      const SpikeSlabFit ss = fit_spikeslab(wn, SpikeSlabPrior::relaxed(wn.noise_precision()), Exec::serial);
      out.push_back(sup_error(ss.point_estimate, truth.f));
      const PartitionFit pf = fit_dp(d, order_statistic_grid(d.design), PartitionPrior{}, Exec::serial);
      out.push_back(sup_error(pf.on_grid(n), truth.f));
      return out;
    });
    for (std::size_t e = 0; e < engines.size(); ++e) {
      std::vector<double> v;
      for (const auto& l : losses) v.push_back(l[e]);
      medians[e].push_back(median(v));
    }
  }
  std::vector<double> ns(kRateSizes.begin(), kRateSizes.end());
  std::ostringstream d;
  double worst = 0.0;
  bool ok = true;
  for (std::size_t e = 0; e < engines.size(); ++e) {
    const double slope = loglog_slope(ns, medians[e]).slope;
    const double gap = std::abs(slope + 1.0 / 3.0);
    worst = std::max(worst, gap);
    ok = ok && gap <= 0.10;
    d << engines[e] << " slope " << slope << (e + 1 < engines.size() ? ", " : "");
  }
  result.measured = worst;
  result.tolerance = 0.10;
  result.comparison = "<=";
  result.passed = ok;
  d << "; measured is the largest |slope + 1/3|";
  result.detail = d.str();
}

void spatial_adaptation(const VerifyOptions& o, CriterionResult& result) {
  const std::size_t n = 2048, reps = 50;
  struct Rep {
    int depth_gap = 0;
    double width_ratio = 0.0;
  };
  const auto out = run_replicates<Rep>(reps, [&](std::size_t r) {
    const Dataset d = brownian_flat(n, replicate_seed(o, 8, n, r));
    const BcartFit fit = fit_exact(d, GaltonWatsonPrior{4.0, SplitDecay::linear, -1}, Exec::serial);
    Rep rep;
    rep.depth_gap = median_deepest_level(fit, {1, 0}) - median_deepest_level(fit, {1, 1});
    const MedianTree tree = median_tree(fit);
    const auto x = grid_points(fit.point_estimate.size());
    const auto radius = local_radius(tree, double(n), 2.0, x);
    rep.width_ratio = mean_over(radius, x, true) / mean_over(radius, x, false);
    return rep;
  });
  int deeper = 0;
  std::vector<double> ratios, gaps;
  for (const Rep& r : out) {
    deeper += r.depth_gap >= 2;
    ratios.push_back(r.width_ratio);
    gaps.push_back(r.depth_gap);
  }
  const double ratio = median(ratios);
  result.measured = deeper;
  result.tolerance = 45;
  result.comparison = ">=";
  result.passed = deeper >= 45 && ratio > 1.0;
  std::ostringstream d;
  d << "depth gap >= 2 in " << deeper << "/50 (median gap " << median(gaps)
    << "); median width ratio rough/flat " << ratio << " (needs > 1)";
  result.detail = d.str();
}

void band_coverage(const VerifyOptions& o, CriterionResult& result) {
  const std::size_t n = 2048, reps = 100, draws = 200;
  // Homogeneous t = 1 construction. With v_n = 2 the rough t = 0.4 half of the
  // spatial truth is not covered at this n: its tail bias outgrows the radius.
  const HolderProfile profile = HolderProfile::constant(1.0, 1.0, 0.5);
  const SynthFunction truth = synth_holder(profile, WaveletRecipe{});
  const int L = exact_log2(n);
  const double c1 = 0.5 * truth.self_similarity_constant(profile, 1, L - 1, L);
  const SelfSimilarityReport ss = check_self_similarity(truth.f, profile, c1, 1, L - 1, L);
  struct Rep {
    bool contained = false;
    double credibility = 0.0;
  };
  const auto out = run_replicates<Rep>(reps, [&](std::size_t r) {
    const Dataset d = simulate(truth.f, ModelKind::white_noise, n, 1.0, replicate_seed(o, 9, n, r));
    const BcartFit fit = fit_exact(d, GaltonWatsonPrior{4.0, SplitDecay::linear, -1}, Exec::serial);
    const MedianTree tree = median_tree(fit);
    auto center = median_estimator(tree, d);
    auto x = grid_points(center.size());
    auto radius = local_radius(tree, double(n), 2.0, x);
    const Band band = make_band(x, center, radius);
    Rep rep;
    rep.contained = contains(band, truth.f).contained;
    std::size_t inside = 0;
    for (const TreeDraw& t : sample_trees(fit, draws, replicate_seed(o, 90, n, r))) {
      inside += contains(band, inverse(t.beta)).contained;
    }
    rep.credibility = double(inside) / double(draws);
    return rep;
  });
  int covered = 0;
  double cred = 0.0;
  for (const Rep& r : out) {
    covered += r.contained;
    cred += r.credibility / double(reps);
  }
  result.measured = covered;
  result.tolerance = 95;
  result.comparison = ">=";
  result.passed = ss.passed && covered >= 95 && cred >= 0.95;
  std::ostringstream d;
  d << "self-similarity " << (ss.passed ? "holds" : "fails") << " (c1 min " << ss.c1_min
    << "); covered " << covered << "/100; mean credibility " << cred << " (needs >= 0.95)";
  result.detail = d.str();
}

void gp_non_adaptation(const VerifyOptions& o, CriterionResult& result) {
  const HolderProfile profile = spatial_profile();
  const SynthFunction truth = synth_holder(profile, WaveletRecipe{});
  const double a1 = 0.4, a2 = 1.0;
  const double rough_slope = -a1 / (2 * a1 + 1), smooth_slope = -a2 / (2 * a2 + 1);
  const std::size_t reps = 20;
  std::vector<double> med;
  for (std::size_t n : kRateSizes) {
    const auto losses = run_replicates<double>(reps, [&](std::size_t r) {
      const Dataset d = simulate(truth.f, ModelKind::regression, n, 1.0, replicate_seed(o, 10, n, r));
      const GpFit fit = fit_conjugate(d, GpPriorSpec::defaults(GpVariant::sieve, n), Exec::serial);
      return half_losses(fit.point_estimate, truth.f).smooth_half;
    });
    med.push_back(median(losses));
  }
  std::vector<double> ns(kRateSizes.begin(), kRateSizes.end());
  const double slope = loglog_slope(ns, med).slope;

  const std::size_t n = 8192, versus = 50;
  const auto wins = run_replicates<int>(versus, [&](std::size_t r) {
    const Dataset d = simulate(truth.f, ModelKind::regression, n, 1.0, replicate_seed(o, 100, n, r));
    const GpFit gp = fit_conjugate(d, GpPriorSpec::defaults(GpVariant::sieve, n), Exec::serial);
    const BcartFit bc = fit_exact(to_sequence(d), GaltonWatsonPrior{4.0, SplitDecay::linear, -1}, Exec::serial);
    return int(half_losses(bc.point_estimate, truth.f).smooth_half <
               half_losses(gp.point_estimate, truth.f).smooth_half);
  });
  int bcart_better = 0;
  for (int w : wins) bcart_better += w;

  const double gap = std::abs(slope - rough_slope);
  const bool separated = std::abs(slope - smooth_slope) > 0.10;
  result.measured = gap;
  result.tolerance = 0.10;
  result.comparison = "<=";
  result.passed = gap <= 0.10 && separated && bcart_better >= 45;
  std::ostringstream d;
  d << "sieve smooth-half slope " << slope << " (target " << rough_slope << ", must differ from "
    << smooth_slope << " by > 0.1: " << (separated ? "yes" : "no") << "); bcart better in "
    << bcart_better << "/50 at n = 8192";
  result.detail = d.str();
}

}  // namespace spadapt::verify
