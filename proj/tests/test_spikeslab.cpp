#include <doctest.h>

#include <cmath>

#include "oracle/oracles.hpp"
#include "spadapt/rng.hpp"
#include "spadapt/spikeslab.hpp"

using namespace spadapt;

namespace {

Dataset sparse_white_noise(int max_level, std::uint64_t seed) {
  const std::size_t n = std::size_t{1} << max_level;
  Dataset d;
  d.kind = ModelKind::white_noise;
  d.n = n;
  d.max_level = max_level;
  CounterRng rng(seed, 1);
  d.y.resize(2 * n);
  for (auto& y : d.y) y = (rng.uniform() < 0.3 ? 2.0 * rng.normal() : 0.0) + rng.normal() / std::sqrt(double(n));
  return d;
}

}  // namespace

TEST_CASE("single-node inclusion probability") {
  const double r = 1.0 / std::sqrt(101.0);
  CHECK(inclusion_prob(0.0, 100.0, 0.5) == doctest::Approx(r / (1 + r)).epsilon(1e-14));
  CHECK(inclusion_prob(0.0, 100.0, 0.5) == doctest::Approx(0.0905).epsilon(1e-3));
  for (double y : {-3.0, 0.0, 0.1, 5.0}) CHECK(inclusion_prob(y, 100.0, 1.0 - 1e-12) > 1.0 - 1e-9);
  CHECK_THROWS_AS(inclusion_prob(0.0, 100.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(inclusion_prob(0.0, 100.0, 1.0), std::domain_error);
  double prev = -1.0;
  for (double y = 0.0; y < 1.0; y += 0.05) {
    const double p = inclusion_prob(y, 50.0, 0.1);
    CHECK(p > prev);
    CHECK(inclusion_prob(-y, 50.0, 0.1) == doctest::Approx(p));
    prev = p;
  }
}

TEST_CASE("uniform slab marginal matches its erf closed form") {
  const Slab uni{SlabKind::uniform, 1.0, 2.0};
  const double n = 30.0, y = 0.7;
  // Integral of N(y; b, 1/n) / (2R) over [-R, R].
  const double mass = 0.5 * (std::erf((2.0 - y) * std::sqrt(n / 2)) - std::erf((-2.0 - y) * std::sqrt(n / 2)));
  CHECK(slab_log_predictive(y, n, uni) == doctest::Approx(std::log(mass / 4.0)));
  CHECK_THROWS_AS((Slab{SlabKind::uniform, 1.0, -1.0}.validate()), std::invalid_argument);
  const SlabPosterior post = slab_posterior(1.9, 4.0, uni);
  CHECK(post.mean < 1.9);
  CHECK(post.sd > 0.0);
}

TEST_CASE("inclusion is calibrated against data drawn from the prior") {
  const double omega = 0.3, n = 10.0;
  CounterRng rng(7, 0);
  const int reps = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const double beta = rng.uniform() < omega ? rng.normal() : 0.0;
    const double p = inclusion_prob(beta + rng.normal() / std::sqrt(n), n, omega);
    sum += p;
    sum_sq += p * p;
  }
  const double mean = sum / reps;
  const double mc_error = std::sqrt((sum_sq / reps - mean * mean) / reps);
  CHECK(std::abs(mean - omega) <= 2.0 * mc_error);
}

TEST_CASE("factorized fit equals subset enumeration at depth 3") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (const Slab& slab : {Slab{}, Slab{SlabKind::uniform, 1.0, 3.0}}) {
      const Dataset d = sparse_white_noise(3, seed);
      SpikeSlabPrior prior = SpikeSlabPrior::relaxed(8.0, 3);
      prior.slab = slab;
      const SpikeSlabFit fit = fit_spikeslab(d, prior, Exec::serial);
      const oracle::NodePosterior ref = oracle::enumerate_spikeslab(d, prior);
      CHECK(fit.log_evidence == doctest::Approx(ref.log_normalizer).epsilon(1e-12));
      for (std::size_t j = 0; j < 16; ++j) CHECK(std::abs(fit.inclusion[j] - ref.inclusion[j]) < 1e-12);
      const SpikeSlabFit par = fit_spikeslab(d, prior, Exec::parallel);
      CHECK(par.inclusion == fit.inclusion);
    }
  }
}

TEST_CASE("median probability model on empty data") {
  Dataset d;
  d.kind = ModelKind::white_noise;
  d.n = 1024;
  d.max_level = 10;
  d.y.assign(2048, 0.0);
  d.y[0] = 0.75;
  const SpikeSlabFit fit = fit_spikeslab(d, SpikeSlabPrior::relaxed(1024.0));
  for (std::size_t j = 1; j < fit.mpm.size(); ++j) CHECK_FALSE(fit.mpm[j]);
  const double shrunk = 1024.0 * 0.75 / 1025.0;
  for (double v : fit.mpm_estimate) CHECK(v == doctest::Approx(shrunk));
}

TEST_CASE("relaxed and strict weights") {
  const double n = 4096;
  const SpikeSlabPrior relaxed = SpikeSlabPrior::relaxed(n, 12);
  const SpikeSlabPrior strict = SpikeSlabPrior::strict(n, 0.75, 12);
  CHECK(relaxed.omega(0) == doctest::Approx(1.0 / 64));
  for (int l = 1; l <= 12; ++l) CHECK(strict.omega(l) < relaxed.omega(l));
  CHECK(SpikeSlabPrior::relaxed(1.0, 3).omega(0) == 0.5);
  CHECK(relaxed.weights_in_range(n, 20.0, 0.01));
  CHECK_FALSE(relaxed.weights_in_range(n, 0.5, 0.01));

  const Dataset d = simulate(doppler_function, ModelKind::white_noise, 1024, 1.0, 3);
  const SpikeSlabFit a = fit_spikeslab(d, SpikeSlabPrior::relaxed(1024.0));
  const SpikeSlabFit b = fit_spikeslab(d, SpikeSlabPrior::strict(1024.0, 0.75));
  double selected_a = 0, selected_b = 0;
  for (std::size_t j = 1; j < a.mpm.size(); ++j) {
    selected_a += a.mpm[j];
    selected_b += b.mpm[j];
  }
  CHECK(selected_a >= selected_b);
  CHECK(selected_a > 0);
}

TEST_CASE("coefficient draws") {
  const Dataset d = sparse_white_noise(3, 11);
  SpikeSlabPrior prior = SpikeSlabPrior::relaxed(8.0, 3);
  for (const Slab& slab : {Slab{}, Slab{SlabKind::uniform, 1.0, 3.0}}) {
    prior.slab = slab;
    const SpikeSlabFit fit = fit_spikeslab(d, prior);
    const std::size_t m = 40000;
    const auto draws = sample_coefficients(fit, m, 4);
    for (std::size_t j = 0; j < 16; ++j) {
      double nonzero = 0, mean = 0;
      for (const auto& b : draws) {
        nonzero += b.at_flat(j) != 0.0;
        mean += b.at_flat(j);
      }
      nonzero /= m;
      mean /= m;
      const double p = fit.inclusion[j];
      CHECK(std::abs(nonzero - p) <= 4.0 * std::sqrt(std::max(p * (1 - p), 1e-12) / m) + 1e-12);
      const double target = p * fit.coef_mean.at_flat(j);
      const double spread = std::sqrt(p * (fit.coef_sd[j] * fit.coef_sd[j] + fit.coef_mean.at_flat(j) * fit.coef_mean.at_flat(j)));
      CHECK(std::abs(mean - target) <= 4.0 * spread / std::sqrt(double(m)) + 1e-12);
    }
  }
  CHECK(sample_coefficients(fit_spikeslab(d, SpikeSlabPrior::relaxed(8.0, 3)), 0, 1).empty());
}
