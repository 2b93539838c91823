#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace spadapt {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Haar node (level, location). The scaling function is (-1, 0).
struct NodeIndex {
  int level = -1;
  long k = 0;

  friend bool operator==(const NodeIndex&, const NodeIndex&) = default;
};

/// Slot in the flat coefficient array: 0 for the scaling node, 2^l + k otherwise.
std::size_t flat_index(NodeIndex node);
NodeIndex node_at(std::size_t flat);
bool is_valid(NodeIndex node);
void require_valid(NodeIndex node);

inline NodeIndex parent(NodeIndex node) {
  return node.level <= 0 ? NodeIndex{-1, 0} : NodeIndex{node.level - 1, node.k / 2};
}
inline NodeIndex left_child(NodeIndex node) { return {node.level + 1, 2 * node.k}; }
inline NodeIndex right_child(NodeIndex node) { return {node.level + 1, 2 * node.k + 1}; }

/// True if `desc` lies strictly below `anc` in the dyadic hierarchy.
/// Every wavelet node descends from the scaling node.
bool is_descendant(NodeIndex desc, NodeIndex anc);

/// Left-open, right-closed interval (lo, hi].
struct DyadicInterval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const;
  double length() const { return hi - lo; }
};

DyadicInterval interval_of(NodeIndex node);

/// k_l(x): location of the level-l interval containing x. x = 0 maps to k = 0.
long locate(int level, double x);

/// Haar basis function at x in [0, 1].
double eval_haar(NodeIndex node, double x);

/// Haar coefficients on the complete dyadic grid up to `max_level`.
/// Storage is flat, indexed by flat_index(); size is 2^(max_level + 1).
class MultiscaleVector {
 public:
  MultiscaleVector() = default;
  explicit MultiscaleVector(int max_level);
  MultiscaleVector(int max_level, std::vector<double> values);

  int max_level() const { return max_level_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](NodeIndex node) { return values_[flat_index(node)]; }
  double operator[](NodeIndex node) const { return values_[flat_index(node)]; }
  double& at_flat(std::size_t j) { return values_[j]; }
  double at_flat(std::size_t j) const { return values_[j]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double squared_norm() const;

 private:
  int max_level_ = -1;
  std::vector<double> values_;
};

/// Exact Haar analysis of the step function taking samples[i] on (i/N, (i+1)/N].
MultiscaleVector forward(std::span<const double> samples);

/// Cell values of the step function with the given coefficients (length 2^(L+1)).
std::vector<double> inverse(const MultiscaleVector& beta);

/// K_j reconstruction: only levels l <= j - 1 plus the scaling term.
std::vector<double> project_level(const MultiscaleVector& beta, int j);

/// Right endpoints (i + 1) / N of the reconstruction grid.
std::vector<double> grid_points(std::size_t cells);

/// log2 of a power of two; throws ShapeError otherwise.
int exact_log2(std::size_t n);

}  // namespace spadapt
