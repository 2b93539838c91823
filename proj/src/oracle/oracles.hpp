#pragma once

#include <map>
#include <string>
#include <vector>

#include "spadapt/partition.hpp"
#include "spadapt/regress.hpp"
#include "spadapt/signals.hpp"
#include "spadapt/spikeslab.hpp"
#include "spadapt/tree.hpp"

// Brute-force references. Everything here is exponential in the problem size
// and only meant for the small cases used by tests and `verify oracle`.
namespace spadapt::oracle {

struct NodePosterior {
  std::vector<double> inclusion;  // flat index, slot 0 = 1
  double log_normalizer = 0.0;
  std::vector<double> mean;       // posterior mean coefficient (flat), where computed
};

/// Sum over all ancestor-closed trees of Pi(T) prod_{internal} r_lk.
NodePosterior enumerate_bcart(const Dataset& data, const GaltonWatsonPrior& prior);

/// Sum over all 2^(2^(L+1) - 1) inclusion subsets.
NodePosterior enumerate_spikeslab(const Dataset& data, const SpikeSlabPrior& prior);

struct PartitionPosterior {
  std::vector<double> segment_prob;  // (N + 1) x (N + 1)
  double log_normalizer = 0.0;
  double expected_segments = 0.0;
  std::size_t partitions = 0;
};

/// Sum over all 2^(N - 1) grid partitions, with segment marginals computed
/// directly from the raw observations.
PartitionPosterior enumerate_partitions(const Dataset& data, const KnotGrid& grid,
                                        const PartitionPrior& prior);

/// Direct log marginal of one segment from its raw observations.
double direct_segment_log_marginal(const std::vector<double>& y, const Slab& slab);

/// Adaptive quadrature of log int N(Y; X b, I) N(b; 0, g (X'X)^{-1}) db over
/// the tree's columns (at most three).
double quadrature_log_marginal(const WaveletDesign& design, const DyadicTree& tree,
                               const std::vector<double>& y, double g);

/// Posterior over all trees of depth <= max_level under Pi(T) N_T(Y), keyed by DyadicTree::key().
std::map<std::string, double> enumerate_tree_posterior(const WaveletDesign& design,
                                                       const std::vector<double>& y,
                                                       const GaltonWatsonPrior& prior,
                                                       const GPriorSpec& gspec);

}  // namespace spadapt::oracle
