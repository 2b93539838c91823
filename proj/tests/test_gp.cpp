#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "spadapt/gp.hpp"
#include "spadapt/logmath.hpp"
#include "spadapt/metrics.hpp"

using namespace spadapt;

namespace {

Dataset regular_zero(std::size_t n) {
  Dataset d;
  d.kind = ModelKind::regression;
  d.n = n;
  for (std::size_t i = 0; i < n; ++i) d.design.push_back(double(i + 1) / double(n));
  d.y.assign(n, 0.0);
  return d;
}

}  // namespace

TEST_CASE("default hyper grids") {
  for (GpVariant v : {GpVariant::sieve, GpVariant::scale, GpVariant::rate}) {
    const GpPriorSpec s = GpPriorSpec::defaults(v, 1024);
    s.validate();
    CHECK(std::accumulate(s.hyper_weights.begin(), s.hyper_weights.end(), 0.0) == doctest::Approx(1.0));
    CHECK(gp_variant_from_string(to_string(v)) == v);
  }
  const GpPriorSpec sieve = GpPriorSpec::defaults(GpVariant::sieve, 1024);
  CHECK(sieve.hyper_values.front() == 1.0);
  CHECK(sieve.hyper_values.back() == 9.0);
  CHECK(sieve.hyper_weights[0] / sieve.hyper_weights[1] == doctest::Approx(std::exp(1.0)));
  CHECK(sieve.prior_variance(4, 3.0) == 0.0);
  CHECK(sieve.prior_variance(3, 3.0) == 1.0);
  const GpPriorSpec scale = GpPriorSpec::defaults(GpVariant::scale, 1024);
  CHECK(scale.hyper_values.size() == 41);
  CHECK(scale.hyper_values.front() == doctest::Approx(1.0 / 32));
  CHECK(scale.hyper_values.back() == doctest::Approx(32.0));
  CHECK(scale.prior_variance(2, 2.0) == doctest::Approx(4.0 * std::pow(2.0, -4.0)));
  const GpPriorSpec rate = GpPriorSpec::defaults(GpVariant::rate, 1024);
  CHECK(rate.hyper_values.size() == 60);
  CHECK(rate.prior_variance(1, 1.0) == doctest::Approx(std::pow(2.0, -3.0)));
  CHECK_THROWS_AS(gp_variant_from_string("nope"), std::invalid_argument);
  GpPriorSpec bad = sieve;
  bad.hyper_weights.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("zero data sieve posterior matches the hand formula") {
  const std::size_t n = 256;
  const GpPriorSpec spec = GpPriorSpec::defaults(GpVariant::sieve, n);
  const GpFit fit = fit_conjugate(regular_zero(n), spec);
  std::vector<double> logw;
  for (double L : spec.hyper_values) {
    const double coefficients = std::exp2(L + 1) - 1;  // wavelet levels 0 .. L
    logw.push_back(-L - 0.5 * coefficients * std::log1p(double(n) * spec.tau * spec.tau));
  }
  const double z = log_sum_exp(logw);
  for (std::size_t h = 0; h < logw.size(); ++h) CHECK(std::abs(fit.hyper_posterior[h] - std::exp(logw[h] - z)) < 1e-12);
  for (double v : fit.point_estimate) CHECK(v == 0.0);
}

TEST_CASE("mixture posterior equals joint-grid summation") {
  const std::size_t n = 16;
  const Dataset d = simulate(doppler_function, ModelKind::regression, n, 0.5, 3);
  for (GpVariant v : {GpVariant::sieve, GpVariant::scale, GpVariant::rate}) {
    GpPriorSpec spec = GpPriorSpec::defaults(v, n);
    const GpFit fit = fit_conjugate(d, spec, Exec::serial);
    // Dense computation in coefficient space: Y ~ N(0, D_h + I / precision).
    const MultiscaleVector Y = forward(d.y);
    const auto m = static_cast<Eigen::Index>(Y.size());
    const Eigen::Map<const Eigen::VectorXd> y(Y.values().data(), m);
    const double precision = double(n) / (d.sigma * d.sigma);
    std::vector<double> logw;
    std::vector<Eigen::VectorXd> means;
    for (std::size_t h = 0; h < spec.hyper_values.size(); ++h) {
      Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, m);
      for (Eigen::Index j = 0; j < m; ++j) D(j, j) = spec.prior_variance(node_at(std::size_t(j)).level, spec.hyper_values[h]);
      const Eigen::MatrixXd S = D + Eigen::MatrixXd::Identity(m, m) / precision;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
      const double logdet = S.diagonal().array().log().sum();
      logw.push_back(std::log(spec.hyper_weights[h]) - 0.5 * logdet - 0.5 * y.dot(ldlt.solve(y)));
      means.push_back(D * ldlt.solve(y));
    }
    const double z = log_sum_exp(logw);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (std::size_t h = 0; h < logw.size(); ++h) {
      CHECK(std::abs(fit.hyper_posterior[h] - std::exp(logw[h] - z)) < 1e-12);
      mean += std::exp(logw[h] - z) * means[h];
    }
    for (Eigen::Index j = 0; j < m; ++j) CHECK(fit.coef_mean.at_flat(std::size_t(j)) == doctest::Approx(mean(j)).epsilon(1e-10));
    const GpFit par = fit_conjugate(d, spec, Exec::parallel);
    CHECK(par.hyper_posterior == fit.hyper_posterior);
    const std::size_t best = std::size_t(std::max_element(fit.log_marginals.begin(), fit.log_marginals.end()) - fit.log_marginals.begin());
    CHECK(fit.eb_index == best);
  }
}

TEST_CASE("non-regular designs are rejected") {
  Dataset d = simulate(doppler_function, ModelKind::regression, 64, 1.0, 1, SimulateOptions{DesignKind::uniform});
  CHECK_THROWS_AS(fit_conjugate(d, GpPriorSpec::defaults(GpVariant::sieve, 64)), ValidationError);
}

TEST_CASE("posterior draws") {
  const Dataset d = simulate(doppler_function, ModelKind::regression, 64, 1.0, 1);
  const GpFit fit = fit_conjugate(d, GpPriorSpec::defaults(GpVariant::rate, 64));
  const auto draws = sample_gp(fit, 4000, 2);
  REQUIRE(draws.size() == 4000);
  REQUIRE(draws[0].size() == fit.point_estimate.size());
  for (std::size_t i = 0; i < 64; i += 9) {
    double mean = 0.0;
    for (const auto& f : draws) mean += f[i] / 4000.0;
    CHECK(mean == doctest::Approx(fit.point_estimate[i]).epsilon(0.05).scale(1.0));
  }
}

TEST_CASE("half losses") {
  const auto f = [](double x) { return std::cos(5 * std::ceil(128 * x) / 128); };
  const std::vector<double> exact = sample_on_grid(f, 128);
  const HalfLosses zero = half_losses(exact, f);
  CHECK(zero.full == doctest::Approx(0.0).scale(1e-12));
  CHECK(zero.smooth_half == doctest::Approx(0.0).scale(1e-12));
  std::vector<double> left = exact;
  for (std::size_t i = 0; i < 64; ++i) left[i] += 1.0;
  const HalfLosses h = half_losses(left, f);
  CHECK(h.smooth_half == doctest::Approx(0.0).scale(1e-12));
  CHECK(h.full > 0.1);
}

TEST_CASE("sieve level tracks the rough-part rate") {
  const std::size_t n = 8192;
  const HolderProfile profile = HolderProfile::piecewise(0.4, 1.0, 0.5, 1.0, 0.5);
  const SynthFunction truth = synth_holder(profile, WaveletRecipe{});
  const double target = std::pow(n / std::log(double(n)), 1.0 / (2 * 0.4 + 1));
  int within = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = simulate(truth.f, ModelKind::regression, n, 1.0, seed);
    const GpFit fit = fit_conjugate(d, GpPriorSpec::defaults(GpVariant::sieve, n));
    // Sieve dimension: coefficients on levels -1..L.
    const double dimension = std::exp2(fit.hyper_median + 1);
    MESSAGE("median L " << fit.hyper_median << " dimension " << dimension << " target " << target);
    within += dimension >= target / 2 && dimension <= target * 2;
  }
  CHECK(within == 20);
}
