#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>

#include "oracle/oracles.hpp"
#include "spadapt/partition.hpp"
#include "spadapt/rng.hpp"

using namespace spadapt;

namespace {

double slab_density(double b, const Slab& slab) {
  if (slab.kind == SlabKind::uniform) return std::abs(b) <= slab.radius ? 0.5 / slab.radius : 0.0;
  return std::exp(-0.5 * b * b / (slab.scale * slab.scale)) / (slab.scale * std::sqrt(2 * std::numbers::pi));
}

double quadrature_segment(const std::vector<double>& y, const Slab& slab) {
  const double n = double(y.size());
  double mean = 0, rss = 0;
  for (double v : y) mean += v / n;
  for (double v : y) rss += (v - mean) * (v - mean);
  double lo = mean - 20 / std::sqrt(n), hi = mean + 20 / std::sqrt(n);
  if (slab.kind == SlabKind::uniform) {
    lo = std::max(lo, -slab.radius);
    hi = std::min(hi, slab.radius);
  }
  const auto f = [&](double b) { return std::exp(-0.5 * n * (b - mean) * (b - mean)) * slab_density(b, slab); };
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-13);
  return -0.5 * rss + std::log(integral);
}

SegmentData::Stats stats_of(const std::vector<double>& y) {
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = double(i + 1) / double(y.size());
  return SegmentData(regular_grid(1), x, y).stats(0, 1);
}

Dataset regular_data(std::size_t n, const RealFunction& f, double sigma, std::uint64_t seed) {
  return simulate(f, ModelKind::regression, n, sigma, seed);
}

}  // namespace

TEST_CASE("segment marginal") {
  const Slab unit{SlabKind::gaussian, 1.0, 3.0};
  CHECK(segment_log_marginal(stats_of({0.0}), unit) == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(segment_log_marginal(SegmentData::Stats{}, unit), std::domain_error);

  CounterRng rng(5, 0);
  for (const Slab& slab : {unit, Slab{SlabKind::gaussian, 10.0, 30.0}, Slab{SlabKind::uniform, 1.0, 2.0}}) {
    for (std::size_t len : {1u, 3u, 17u, 200u}) {
      std::vector<double> y(len);
      const double level = 3.0 * rng.normal() * (slab.kind == SlabKind::uniform ? 0.3 : 1.0);
      for (double& v : y) v = level + rng.normal();
      const double got = segment_log_marginal(stats_of(y), slab);
      CHECK(std::abs(got - quadrature_segment(y, slab)) < 1e-9);
      CHECK(std::abs(got - oracle::direct_segment_log_marginal(y, slab)) < 1e-9);
    }
  }
}

TEST_CASE("segment marginal sandwich") {
  const Slab slab{SlabKind::gaussian, 10.0, 30.0};
  const double b0 = 3.0 * slab.scale, eps = 1.0;
  const double c1 = slab_density(0.0, slab), c0 = slab_density(b0, slab);
  const boost::math::normal std_normal;
  CounterRng rng(6, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t len = 1 + rng.below(300);
    const double level = (2.0 * rng.uniform() - 1.0) * (b0 - eps - 3.0);
    std::vector<double> y(len);
    for (double& v : y) v = level + rng.normal();
    const SegmentData::Stats s = stats_of(y);
    if (std::abs(s.mean) > b0 - eps) continue;
    const double scale = -0.5 * s.rss + 0.5 * std::log(2 * std::numbers::pi / double(len));
    const double ratio = std::exp(segment_log_marginal(s, slab) - scale);
    const double inner_mass = 2.0 * boost::math::cdf(std_normal, eps * std::sqrt(double(len))) - 1.0;
    CHECK(ratio <= c1 * (1 + 1e-12));
    CHECK(ratio >= c0 * inner_mass);
  }
}

TEST_CASE("order-statistic grid") {
  const std::vector<double> x = make_design(DesignKind::uniform, 2048, 3);
  const KnotGrid g = order_statistic_grid(x);
  const std::size_t step = std::size_t(std::ceil(2 * std::log(2048.0)));
  CHECK(g.z.front() == 0.0);
  CHECK(g.z.back() == 1.0);
  CHECK(g.cells() == 2048 / step);
  CHECK(g.c_lower > 0.0);
  CHECK(g.c_upper >= g.c_lower);
  CHECK(g.cell_of(0.0) == 1);
  CHECK(g.cell_of(1.0) == g.cells());
  CHECK(g.cell_of(g.z[3]) == 3);
  CHECK_THROWS_AS(order_statistic_grid(std::vector<double>{0.5, 0.2}), ShapeError);
}

TEST_CASE("dynamic program equals partition enumeration") {
  for (SizeMeasure size : {SizeMeasure::length, SizeMeasure::units}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const Dataset d = regular_data(60, [](double x) { return x < 0.35 ? -1.0 : 2.0 * x; }, 0.5, seed);
      const KnotGrid grid = regular_grid(10, 60);
      PartitionPrior prior;
      prior.size = size;
      prior.B = 2.0 + double(seed);
      const PartitionFit fit = fit_dp(d, grid, prior, Exec::serial);
      const oracle::PartitionPosterior ref = oracle::enumerate_partitions(d, grid, prior);
      CHECK(ref.partitions == 512);
      CHECK(fit.log_normalizer == doctest::Approx(ref.log_normalizer).epsilon(1e-11));
      for (std::size_t i = 0; i < fit.segment_prob.size(); ++i) CHECK(std::abs(fit.segment_prob[i] - ref.segment_prob[i]) < 1e-9);
      CHECK(fit.expected_segments == doctest::Approx(ref.expected_segments).epsilon(1e-9));
      const PartitionFit par = fit_dp(d, grid, prior, Exec::parallel);
      CHECK(par.segment_prob == fit.segment_prob);
      CHECK(par.cell_estimate == fit.cell_estimate);
    }
  }
}

TEST_CASE("constant truth concentrates on the trivial partition") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = regular_data(512, [](double) { return 1.5; }, 0.01, seed);
    const PartitionFit fit = fit_dp(d, order_statistic_grid(d.design));
    CHECK(fit.prob(0, fit.grid.cells()) > 0.9);
  }
}

TEST_CASE("MAP break locates a jump") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset d = regular_data(2048, [](double x) { return x <= 0.5 ? 0.0 : 1.0; }, 1.0, seed);
    const PartitionFit fit = fit_dp(d, order_statistic_grid(d.design));
    const std::size_t jump = fit.grid.cell_of(0.5);  // knot index of 0.5
    REQUIRE(fit.grid.z[jump] == 0.5);
    bool near = false;
    for (std::size_t b : fit.map_breaks) {
      if (b == 0 || b == fit.grid.cells()) continue;
      near = near || (b + 1 >= jump && b <= jump + 1);
    }
    hits += near;
  }
  CHECK(hits >= 95);
}

TEST_CASE("stronger repulsion lowers the expected segment count") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = regular_data(256, doppler_function, 0.3, seed);
    const KnotGrid grid = order_statistic_grid(d.design);
    double prev = INFINITY;
    for (double B : {0.5, 2.0, 5.0, 10.0, 15.0}) {
      PartitionPrior prior;
      prior.B = B;
      const double e = fit_dp(d, grid, prior).expected_segments;
      CHECK(e < prev);
      prev = e;
    }
  }
}

TEST_CASE("backward sampling reproduces segment probabilities") {
  const Dataset d = regular_data(96, [](double x) { return std::sin(6 * x); }, 0.4, 2);
  const PartitionFit fit = fit_dp(d, regular_grid(12, 96), PartitionPrior{2.0});
  const std::size_t m = 100000;
  const auto draws = sample_partitions(fit, m, 8);
  REQUIRE(draws.size() == m);
  const std::size_t K = fit.grid.z.size();
  std::vector<double> freq(K * K, 0.0);
  for (const auto& br : draws) {
    CHECK(br.front() == 0);
    CHECK(br.back() == 12);
    for (std::size_t s = 1; s < br.size(); ++s) freq[br[s - 1] * K + br[s]] += 1.0 / m;
  }
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = i + 1; j < K; ++j) {
      const double p = fit.prob(i, j);
      // 78 segments: Bonferroni-level band with a one-count floor for rare segments.
      CHECK(std::abs(freq[i * K + j] - p) <= 4.5 * std::sqrt(std::max(p * (1 - p), 1.0 / m) / m));
    }
  }
  const auto again = sample_partitions(fit, 10, 8);
  for (std::size_t i = 0; i < 10; ++i) CHECK(again[i] == draws[i]);
}

TEST_CASE("rate diagnostic") {
  const Dataset d = regular_data(512, [](double x) { return x; }, 0.2, 1);
  const PartitionFit fit = fit_dp(d, order_statistic_grid(d.design));
  const HolderProfile p = HolderProfile::constant(1.0, 1.0, 0.5);
  const double r = rate_diag(fit, d.truth, p, 512);
  CHECK(std::isfinite(r));
  CHECK(r > 0.0);
  CHECK(fit.fitted.size() == 512);
  CHECK(fit.on_grid(64).size() == 64);
}
