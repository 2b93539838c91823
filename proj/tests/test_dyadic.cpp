#include <doctest.h>

#include <cmath>

#include "spadapt/dyadic.hpp"
#include "spadapt/rng.hpp"

using namespace spadapt;

TEST_CASE("eval_haar matches the basis definition") {
  CHECK(eval_haar({-1, 0}, 0.3) == 1.0);
  CHECK(eval_haar({0, 0}, 0.25) == 1.0);
  CHECK(eval_haar({0, 0}, 0.75) == -1.0);
  CHECK(eval_haar({1, 1}, 0.6) == doctest::Approx(1.41421356).epsilon(1e-8));
  CHECK(eval_haar({1, 1}, 0.3) == 0.0);
  CHECK(eval_haar({0, 0}, 0.5) == 1.0);  // right-closed halves
  CHECK(eval_haar({0, 0}, 0.0) == 1.0);  // x = 0 joins the first interval
}

TEST_CASE("invalid nodes and points raise domain errors") {
  CHECK_THROWS_AS(eval_haar({2, 4}, 0.5), std::domain_error);
  CHECK_THROWS_AS(eval_haar({-1, 1}, 0.5), std::domain_error);
  CHECK_THROWS_AS(eval_haar({0, 0}, 1.5), std::domain_error);
}

TEST_CASE("flat indexing and family arithmetic") {
  CHECK(flat_index({-1, 0}) == 0);
  CHECK(flat_index({0, 0}) == 1);
  CHECK(flat_index({3, 5}) == 13);
  CHECK(node_at(13) == NodeIndex{3, 5});
  CHECK(parent({3, 5}) == NodeIndex{2, 2});
  CHECK(left_child({2, 2}) == NodeIndex{3, 4});
  CHECK(right_child({2, 2}) == NodeIndex{3, 5});
  CHECK(is_descendant({3, 5}, {1, 1}));
  CHECK_FALSE(is_descendant({3, 5}, {1, 0}));
  CHECK(is_descendant({0, 0}, {-1, 0}));
}

TEST_CASE("dyadic intervals tile and nest") {
  for (int l = 0; l < 6; ++l) {
    double prev = 0.0;
    for (long k = 0; k < (1L << l); ++k) {
      const DyadicInterval I = interval_of({l, k});
      CHECK(I.lo == prev);
      prev = I.hi;
      const DyadicInterval a = interval_of(left_child({l, k}));
      const DyadicInterval b = interval_of(right_child({l, k}));
      CHECK(a.lo == I.lo);
      CHECK(a.hi == b.lo);
      CHECK(b.hi == I.hi);
    }
    CHECK(prev == 1.0);
  }
  CHECK(locate(3, 0.0) == 0);
  CHECK(locate(3, 0.125) == 0);
  CHECK(locate(3, 0.1251) == 1);
  CHECK(locate(3, 1.0) == 7);
}

TEST_CASE("forward of a constant keeps only the scaling coefficient") {
  const std::vector<double> v(64, 2.5);
  const MultiscaleVector b = forward(v);
  CHECK(b.at_flat(0) == doctest::Approx(2.5));
  for (std::size_t j = 1; j < b.size(); ++j) CHECK(std::abs(b.at_flat(j)) < 1e-15);
}

TEST_CASE("two-point analysis") {
  const std::vector<double> v{3.0, 1.0};
  const MultiscaleVector b = forward(v);
  CHECK(b.max_level() == 0);
  CHECK(b.at_flat(0) == doctest::Approx(2.0));
  CHECK(b.at_flat(1) == doctest::Approx(1.0));
}

TEST_CASE("non-power-of-two input is a shape error") {
  const std::vector<double> v(12, 1.0);
  CHECK_THROWS_AS(forward(v), ShapeError);
  CHECK_THROWS_AS(MultiscaleVector(2, std::vector<double>(7)), ShapeError);
}

TEST_CASE("forward agrees with naive inner products and round-trips") {
  CounterRng rng(11, 0);
  std::vector<double> v(2048);
  for (double& x : v) x = rng.normal();
  const MultiscaleVector b = forward(v);
  const std::size_t N = v.size();
  // Naive <f, psi_lk> for a sample of nodes, using the cell midpoints.
  double worst = 0.0;
  for (std::size_t j : {std::size_t{0}, std::size_t{1}, std::size_t{2}, std::size_t{5}, std::size_t{77},
                        std::size_t{513}, std::size_t{1023}}) {
    const NodeIndex node = node_at(j);
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      s += v[i] * eval_haar(node, (static_cast<double>(i) + 0.5) / static_cast<double>(N)) / static_cast<double>(N);
    }
    worst = std::max(worst, std::abs(s - b.at_flat(j)));
  }
  CHECK(worst < 1e-12);
  const std::vector<double> back = inverse(b);
  double err = 0.0;
  for (std::size_t i = 0; i < N; ++i) err = std::max(err, std::abs(back[i] - v[i]));
  CHECK(err < 1e-12);
  const MultiscaleVector again = forward(back);
  for (std::size_t j = 0; j < N; ++j) CHECK(std::abs(again.at_flat(j) - b.at_flat(j)) < 1e-12);
}

TEST_CASE("inverse of simple coefficient maps") {
  MultiscaleVector b(3);
  for (double v : inverse(b)) CHECK(v == 0.0);
  b[{0, 0}] = 1.0;
  const std::vector<double> f = inverse(b);
  REQUIRE(f.size() == 16);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == (i < 8 ? 1.0 : -1.0));
  CHECK_THROWS_AS(inverse(MultiscaleVector()), ShapeError);
}

TEST_CASE("Parseval holds for the step function") {
  CounterRng rng(3, 1);
  std::vector<double> v(256);
  for (double& x : v) x = rng.normal();
  double l2 = 0.0;
  for (double x : v) l2 += x * x / 256.0;
  CHECK(forward(v).squared_norm() == doctest::Approx(l2).epsilon(1e-12));
}

TEST_CASE("project_level") {
  CounterRng rng(5, 0);
  std::vector<double> v(32);
  for (double& x : v) x = rng.normal();
  const MultiscaleVector b = forward(v);
  const std::vector<double> full = project_level(b, b.max_level() + 1);
  const std::vector<double> inv = inverse(b);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(full[i] == inv[i]);
  for (double x : project_level(b, 0)) CHECK(x == doctest::Approx(b.at_flat(0)));
  MultiscaleVector single(4);
  single[{2, 1}] = 1.0;
  for (double x : project_level(single, 2)) CHECK(x == 0.0);
  CHECK_THROWS_AS(project_level(b, b.max_level() + 2), std::out_of_range);
  CHECK_THROWS_AS(project_level(b, -1), std::out_of_range);
}

TEST_CASE("basis orthonormality on the grid") {
  const int L = 4;
  const std::size_t N = std::size_t{1} << (L + 1);
  const std::size_t nodes = N;
  std::vector<std::vector<double>> cols(nodes, std::vector<double>(N));
  for (std::size_t j = 0; j < nodes; ++j) {
    for (std::size_t i = 0; i < N; ++i) cols[j][i] = eval_haar(node_at(j), (i + 0.5) / N);
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < nodes; ++a) {
    for (std::size_t b = 0; b < nodes; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i) s += cols[a][i] * cols[b][i] / static_cast<double>(N);
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  }
  CHECK(worst < 1e-12);
}
