#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spadapt/bands.hpp"
#include "spadapt/bcart.hpp"
#include "spadapt/metrics.hpp"

using namespace spadapt;

namespace {

std::vector<double> inclusion_vector(int max_level, std::initializer_list<std::pair<NodeIndex, double>> values) {
  std::vector<double> p(std::size_t{1} << (max_level + 1), 0.0);
  p[0] = 1.0;
  for (const auto& [node, v] : values) p[flat_index(node)] = v;
  return p;
}

double sup_on(std::span<const double> est, std::span<const double> truth, double lo, double hi) {
  const std::size_t N = est.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double x = double(i + 1) / double(N);
    if (x > lo && x <= hi) worst = std::max(worst, std::abs(est[i] - truth[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("median tree thresholding") {
  const MedianTree t = median_tree(inclusion_vector(1, {{{0, 0}, 0.9}, {{1, 0}, 0.4}, {{1, 1}, 0.6}}), 1);
  CHECK(t.nodes() == std::vector<NodeIndex>{{0, 0}, {1, 1}});
  CHECK(t.repaired == 0);
  const MedianTree empty = median_tree(inclusion_vector(2, {{{0, 0}, 0.2}, {{1, 0}, 0.1}}), 2);
  CHECK(empty.nodes().empty());
  CHECK(empty.contains({-1, 0}));
  const MedianTree tie = median_tree(inclusion_vector(1, {{{0, 0}, 0.5}}), 1);
  CHECK(tie.contains({0, 0}));
  // A child above the threshold under an excluded parent is dropped and reported.
  const MedianTree repaired = median_tree(inclusion_vector(2, {{{0, 0}, 0.9}, {{1, 0}, 0.3}, {{2, 1}, 0.8}}), 2);
  CHECK(repaired.nodes() == std::vector<NodeIndex>{{0, 0}});
  CHECK(repaired.repaired == 1);
}

TEST_CASE("median tree of an exact posterior") {
  const Dataset d = simulate(doppler_function, ModelKind::white_noise, 8, 0.3, 4);
  const BcartFit fit = fit_exact(d, GaltonWatsonPrior{2.5, SplitDecay::linear, 3});
  const MedianTree t = median_tree(fit);
  CHECK(t.repaired == 0);
  for (std::size_t j = 1; j < 16; ++j) CHECK(bool(t.mask[j]) == (fit.inclusion[j] >= 0.5));
}

TEST_CASE("median estimator") {
  const Dataset d = simulate(doppler_function, ModelKind::white_noise, 64, 1.0, 2);
  const MedianTree none = median_tree(inclusion_vector(6, {}), 6);
  for (double v : median_estimator(none, d)) CHECK(v == doctest::Approx(d.y[0]));
  const MedianTree full = median_tree(std::vector<double>(128, 1.0), 6);
  const auto rec = median_estimator(full, d);
  const auto inv = inverse(d.coefficients());
  REQUIRE(rec.size() == inv.size());
  for (std::size_t i = 0; i < rec.size(); ++i) CHECK(rec[i] == doctest::Approx(inv[i]));
}

TEST_CASE("local radius") {
  const MedianTree root = median_tree(inclusion_vector(3, {{{0, 0}, 1.0}}), 3);
  const std::vector<double> x{0.0, 0.1, 0.5, 0.51, 1.0};
  const double n = 1024;
  for (double r : local_radius(root, n, 2.0, x)) CHECK(r == doctest::Approx(2.0 * std::sqrt(std::log(n) / n)));
  const MedianTree left = median_tree(inclusion_vector(3, {{{0, 0}, 1.0}, {{1, 0}, 1.0}, {{2, 0}, 0.7}}), 3);
  const auto r = local_radius(left, n, 2.0, x);
  CHECK(r[1] > r[3]);
  CHECK(r[1] == doctest::Approx(2.0 * std::sqrt(std::log(n) / n) * (1 + std::sqrt(2.0) + 2.0)));
  CHECK(local_radius(median_tree(inclusion_vector(3, {}), 3), n, 2.0, x)[0] == 0.0);
  CHECK_THROWS_AS(local_radius(root, n, 0.0, x), std::domain_error);
}

TEST_CASE("band membership") {
  const Band band = make_band({0.25, 0.5, 0.75, 1.0}, {1, 2, 3, 4}, {0.5, 0.5, 0.0, 0.5});
  CHECK(contains(band, std::vector<double>{1, 2, 3, 4}).contained);
  std::vector<double> off{1, 2, 3, 4};
  off[1] += 2 * 0.5;
  const Containment c = contains(band, off);
  CHECK_FALSE(c.contained);
  CHECK(c.worst == doctest::Approx(2.0));
  CHECK(c.excluded == 1);
  CHECK(c.excluded_fraction == doctest::Approx(0.25));
  CHECK(contains(band, [](double x) { return 4 * x + (x == 0.75 ? 100.0 : 0.0); }).contained);
  CHECK_THROWS_AS(make_band({0.5}, {1, 2}, {1}), ShapeError);
}

TEST_CASE("self-similarity") {
  const HolderProfile p = HolderProfile::piecewise(0.4, 1.0, 0.5, 1.0, 0.5);
  const SynthFunction synth = synth_holder(p, WaveletRecipe{12});
  const double c1 = synth.self_similarity_constant(p, 1, 8, 11);
  REQUIRE(c1 > 0.0);
  const SelfSimilarityReport ok = check_self_similarity(synth.f, p, 0.9 * c1, 1, 8, 11);
  CHECK(ok.passed);
  CHECK(ok.c1_min == doctest::Approx(c1).epsilon(1e-9));
  CHECK_FALSE(check_self_similarity(synth.f, p, 1.1 * c1, 1, 8, 11).passed);
  CHECK(ok.c1_by_level.size() == 8);

  const SelfSimilarityReport flat = check_self_similarity([](double) { return 2.0; }, p, 1e-9, 1, 8, 11);
  CHECK_FALSE(flat.passed);
  CHECK(flat.c1_min == 0.0);

  const SynthFunction truncated = synth_holder(p, WaveletRecipe{5});
  const SelfSimilarityReport cut = check_self_similarity(truncated.f, p, 1e-6, 1, 8, 11);
  CHECK_FALSE(cut.passed);
  for (std::size_t i = 0; i < cut.c1_by_level.size(); ++i) {
    const int j = 1 + int(i);
    if (j > 5) CHECK(cut.c1_by_level[i] == doctest::Approx(0.0).epsilon(1e-12));
    else CHECK(cut.c1_by_level[i] > 0.0);
  }
}

TEST_CASE("median-tree fits adapt to the flat half") {
  const std::size_t n = 2048;
  const GaltonWatsonPrior prior{4.0, SplitDecay::linear, -1};
  int better = 0;
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Dataset d = brownian_flat(n, seed);
    const BcartFit fit = fit_exact(d, prior);
    const MedianTree t = median_tree(fit);
    const auto est = median_estimator(t, d);
    const auto truth = sample_on_grid(d.truth, est.size());
    better += sup_on(est, truth, 0.5, 1.0) < sup_on(est, truth, 0.0, 0.5);

    const auto x = grid_points(est.size());
    const auto radius = local_radius(t, double(n), 2.0, x);
    double left = 0, right = 0;
    for (std::size_t i = 0; i < x.size(); ++i) (x[i] <= 0.5 ? left : right) += radius[i];
    ratios.push_back(left / right);
    const double sup_radius = *std::max_element(radius.begin(), radius.end());
    for (double r : radius) CHECK(r <= sup_radius);
  }
  CHECK(better >= 45);
  CHECK(median(ratios) > 1.0);
}
