#include <doctest.h>

#include <cmath>

#include "spadapt/logmath.hpp"
#include "spadapt/tree.hpp"

using namespace spadapt;

TEST_CASE("tree node sets") {
  DyadicTree t(3);
  CHECK(t.internal_count() == 0);
  CHECK(t.external_nodes() == std::vector<NodeIndex>{{0, 0}});
  CHECK(t.growable_nodes() == std::vector<NodeIndex>{{0, 0}});
  CHECK(t.preterminal_nodes().empty());
  t.grow({0, 0});
  t.grow({1, 1});
  CHECK(t.internal_count() == 2);
  CHECK(t.is_internal({1, 1}));
  CHECK_FALSE(t.is_internal({1, 0}));
  CHECK(t.external_nodes().size() == 3);
  CHECK(t.preterminal_nodes() == std::vector<NodeIndex>{{1, 1}});
  CHECK(t.deepest_internal_level() == 1);
  CHECK_THROWS_AS(t.grow({2, 0}), std::invalid_argument);  // parent (1, 0) is external
  CHECK_THROWS_AS(t.prune({0, 0}), std::invalid_argument); // not pre-terminal
  t.prune({1, 1});
  CHECK(t.preterminal_nodes() == std::vector<NodeIndex>{{0, 0}});
  CHECK_THROWS_AS(DyadicTree(3, {{2, 1}}), std::invalid_argument);
  CHECK(DyadicTree(3, {{0, 0}, {1, 0}, {2, 1}}).ancestor_closed());
}

TEST_CASE("leaves at the deepest level are not growable") {
  DyadicTree t(0);
  t.grow({0, 0});
  CHECK(t.external_nodes().size() == 2);
  CHECK(t.growable_nodes().empty());
  CHECK_THROWS_AS(t.grow({1, 0}), std::invalid_argument);
}

TEST_CASE("enumeration counts match the Catalan-type recursion") {
  CHECK(enumerate_trees(0).size() == 2);
  CHECK(enumerate_trees(1).size() == 5);
  CHECK(enumerate_trees(2).size() == 26);
  CHECK(enumerate_trees(3).size() == 677);
  for (const auto& t : enumerate_trees(2)) CHECK(t.ancestor_closed());
}

TEST_CASE("Galton-Watson prior") {
  GaltonWatsonPrior lin{4.0, SplitDecay::linear, 3};
  GaltonWatsonPrior quad{4.0, SplitDecay::quadratic, 3};
  CHECK(lin.split_prob(0) == 1.0);
  CHECK(lin.split_prob(2) == doctest::Approx(1.0 / 16));
  CHECK(quad.split_prob(2) == doctest::Approx(1.0 / 256));
  CHECK(lin.split_prob(4) == 0.0);
  for (int l = 1; l <= 3; ++l) {
    CHECK(lin.split_prob(l) <= 0.5);
    CHECK(quad.split_prob(l) <= 0.5);
  }
  CHECK_THROWS_AS((GaltonWatsonPrior{2.0, SplitDecay::linear, 3}.validate()), std::invalid_argument);

  for (const auto& prior : {lin, quad, GaltonWatsonPrior{2.5, SplitDecay::linear, 3}}) {
    std::vector<double> lp;
    for (const auto& t : enumerate_trees(3)) lp.push_back(prior.log_prior(t));
    CHECK(std::exp(log_sum_exp(lp)) == doctest::Approx(1.0).epsilon(1e-12));
  }

  DyadicTree t(3, {{0, 0}, {1, 0}});
  DyadicTree grown = t;
  grown.grow({2, 1});
  CHECK(lin.log_prior(grown) - lin.log_prior(t) == doctest::Approx(lin.log_grow_ratio({2, 1})));
  CHECK(quad.log_prior(grown) - quad.log_prior(t) == doctest::Approx(quad.log_grow_ratio({2, 1})));
}
