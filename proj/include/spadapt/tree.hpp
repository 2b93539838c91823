#pragma once

#include <string>
#include <vector>

#include "spadapt/dyadic.hpp"

namespace spadapt {

/// Ancestor-closed binary tree over wavelet nodes with level <= max_level,
/// represented by its internal set. The scaling node (-1, 0) is always
/// internal. External nodes are the non-internal children of internal nodes
/// (or (0, 0) alone when nothing is internal).
class DyadicTree {
 public:
  DyadicTree() = default;
  explicit DyadicTree(int max_level);
  /// Throws std::invalid_argument if the set is not ancestor-closed.
  DyadicTree(int max_level, const std::vector<NodeIndex>& internal);

  int max_level() const { return max_level_; }
  bool is_internal(NodeIndex node) const;
  std::size_t internal_count() const { return count_; }

  std::vector<NodeIndex> internal_nodes() const;
  std::vector<NodeIndex> external_nodes() const;
  /// Internal nodes whose children are both external (eligible for pruning).
  std::vector<NodeIndex> preterminal_nodes() const;
  /// External nodes with level <= max_level (eligible for growing).
  std::vector<NodeIndex> growable_nodes() const;

  void grow(NodeIndex node);
  void prune(NodeIndex node);

  /// Flat internal mask; slot 0 (scaling) is always 1.
  const std::vector<char>& mask() const { return mask_; }
  std::string key() const;
  int deepest_internal_level() const;

  bool ancestor_closed() const;

  friend bool operator==(const DyadicTree& a, const DyadicTree& b) { return a.mask_ == b.mask_; }

 private:
  int max_level_ = -1;
  std::vector<char> mask_;
  std::size_t count_ = 0;
};

/// All ancestor-closed trees with levels <= max_level (small max_level only).
std::vector<DyadicTree> enumerate_trees(int max_level);

enum class SplitDecay { linear, quadratic };

/// Heterogeneous Galton-Watson tree prior, p_l = gamma^{-l} or gamma^{-l^2}
/// for 0 <= l <= max_level, p_l = 0 deeper.
struct GaltonWatsonPrior {
  double gamma = 4.0;
  SplitDecay decay = SplitDecay::linear;
  int max_level = 0;

  void validate() const;
  double split_prob(int level) const;
  double log_split_prob(int level) const;
  double log_stop_prob(int level) const;

  /// log Pi(T) = sum_int log p_l + sum_ext log(1 - p_l).
  double log_prior(const DyadicTree& tree) const;
  /// log Pi(T + node) - log Pi(T) for growing external node `node`.
  double log_grow_ratio(NodeIndex node) const;
};

}  // namespace spadapt
