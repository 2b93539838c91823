#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "spadapt/dyadic.hpp"
#include "spadapt/tree.hpp"

namespace spadapt {

struct TreeDraw {
  DyadicTree tree;
  MultiscaleVector beta;  // zero off the tree
};

/// Node-level posterior shared by the wavelet engines.
struct PosteriorSummary {
  std::string engine;
  int max_level = -1;
  /// Posterior probability that each node is internal (or included), flat index; slot 0 is 1.
  std::vector<double> inclusion;
  /// Coefficient posterior mean conditional on inclusion.
  MultiscaleVector coef_mean;
  /// Coefficient posterior variance conditional on inclusion.
  double coef_var = 0.0;
  /// Posterior mean of f on the right endpoints of a regular grid.
  std::vector<double> point_estimate;
  double log_evidence = std::nan("");
  std::vector<TreeDraw> draws;
  std::map<std::string, double> diagnostics;

  double inclusion_at(NodeIndex node) const {
    const std::size_t j = flat_index(node);
    return j < inclusion.size() ? inclusion[j] : 0.0;
  }
};

}  // namespace spadapt
