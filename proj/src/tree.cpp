#include "spadapt/tree.hpp"

#include <cmath>
#include <stdexcept>

#include "spadapt/logmath.hpp"

namespace spadapt {

DyadicTree::DyadicTree(int max_level)
    : max_level_(max_level), mask_(std::size_t{1} << (max_level + 1), 0) {
  if (max_level < 0 || max_level > 30) throw std::invalid_argument("DyadicTree: bad max_level");
  mask_[0] = 1;
}

DyadicTree::DyadicTree(int max_level, const std::vector<NodeIndex>& internal)
    : DyadicTree(max_level) {
  for (const NodeIndex& node : internal) {
    require_valid(node);
    if (node.level > max_level) {
      throw std::invalid_argument("DyadicTree: node deeper than max_level");
    }
    if (node.level < 0) continue;
    if (!mask_[flat_index(node)]) {
      mask_[flat_index(node)] = 1;
      ++count_;
    }
  }
  if (!ancestor_closed()) throw std::invalid_argument("DyadicTree: node set is not ancestor-closed");
}

bool DyadicTree::is_internal(NodeIndex node) const {
  if (node.level < 0) return true;
  if (node.level > max_level_) return false;
  return mask_[flat_index(node)] != 0;
}

bool DyadicTree::ancestor_closed() const {
  for (std::size_t j = 2; j < mask_.size(); ++j) {
    if (mask_[j] && !mask_[j / 2]) return false;
  }
  return true;
}

std::vector<NodeIndex> DyadicTree::internal_nodes() const {
  std::vector<NodeIndex> out;
  for (std::size_t j = 1; j < mask_.size(); ++j) {
    if (mask_[j]) out.push_back(node_at(j));
  }
  return out;
}

std::vector<NodeIndex> DyadicTree::external_nodes() const {
  std::vector<NodeIndex> out;
  if (!mask_[1]) return {NodeIndex{0, 0}};
  for (std::size_t j = 1; j < mask_.size(); ++j) {
    if (!mask_[j]) continue;
    const NodeIndex node = node_at(j);
    for (NodeIndex c : {left_child(node), right_child(node)}) {
      if (!is_internal(c)) out.push_back(c);
    }
  }
  return out;
}

std::vector<NodeIndex> DyadicTree::preterminal_nodes() const {
  std::vector<NodeIndex> out;
  for (std::size_t j = 1; j < mask_.size(); ++j) {
    if (!mask_[j]) continue;
    const NodeIndex node = node_at(j);
    if (!is_internal(left_child(node)) && !is_internal(right_child(node))) out.push_back(node);
  }
  return out;
}

std::vector<NodeIndex> DyadicTree::growable_nodes() const {
  std::vector<NodeIndex> out;
  for (NodeIndex node : external_nodes()) {
    if (node.level <= max_level_) out.push_back(node);
  }
  return out;
}

void DyadicTree::grow(NodeIndex node) {
  require_valid(node);
  if (node.level < 0 || node.level > max_level_ || is_internal(node) ||
      (node.level > 0 && !is_internal(parent(node)))) {
    throw std::invalid_argument("DyadicTree::grow: node is not growable");
  }
  mask_[flat_index(node)] = 1;
  ++count_;
}

void DyadicTree::prune(NodeIndex node) {
  require_valid(node);
  if (node.level < 0 || !is_internal(node) || is_internal(left_child(node)) ||
      is_internal(right_child(node))) {
    throw std::invalid_argument("DyadicTree::prune: node is not pre-terminal");
  }
  mask_[flat_index(node)] = 0;
  --count_;
}

std::string DyadicTree::key() const {
  std::string s(mask_.size() - 1, '0');
  for (std::size_t j = 1; j < mask_.size(); ++j) s[j - 1] = mask_[j] ? '1' : '0';
  return s;
}

int DyadicTree::deepest_internal_level() const {
  for (std::size_t j = mask_.size(); j-- > 1;) {
    if (mask_[j]) return node_at(j).level;
  }
  return -1;
}

namespace {

void subtrees(NodeIndex node, int max_level, std::vector<std::vector<NodeIndex>>& out) {
  out.clear();
  out.push_back({});
  if (node.level > max_level) return;
  std::vector<std::vector<NodeIndex>> left, right;
  subtrees(left_child(node), max_level, left);
  subtrees(right_child(node), max_level, right);
  for (const auto& a : left) {
    for (const auto& b : right) {
      std::vector<NodeIndex> set{node};
      set.insert(set.end(), a.begin(), a.end());
      set.insert(set.end(), b.begin(), b.end());
      out.push_back(std::move(set));
    }
  }
}

}  // namespace

std::vector<DyadicTree> enumerate_trees(int max_level) {
  if (max_level > 3) throw std::invalid_argument("enumerate_trees: max_level <= 3 only");
  std::vector<std::vector<NodeIndex>> sets;
  subtrees({0, 0}, max_level, sets);
  std::vector<DyadicTree> out;
  out.reserve(sets.size());
  for (const auto& s : sets) out.emplace_back(max_level, s);
  return out;
}

void GaltonWatsonPrior::validate() const {
  if (!(gamma > 2.0)) throw std::invalid_argument("GaltonWatsonPrior: gamma must exceed 2");
  if (max_level < 0) throw std::invalid_argument("GaltonWatsonPrior: max_level must be >= 0");
}

double GaltonWatsonPrior::split_prob(int level) const {
  if (level < 0) return 1.0;
  if (level > max_level) return 0.0;
  const double e = decay == SplitDecay::linear ? level : static_cast<double>(level) * level;
  return std::pow(gamma, -e);
}

double GaltonWatsonPrior::log_split_prob(int level) const {
  if (level < 0) return 0.0;
  if (level > max_level) return kNegInf;
  const double e = decay == SplitDecay::linear ? level : static_cast<double>(level) * level;
  return -e * std::log(gamma);
}

double GaltonWatsonPrior::log_stop_prob(int level) const { return log1m(split_prob(level)); }

double GaltonWatsonPrior::log_prior(const DyadicTree& tree) const {
  double s = 0.0;
  for (NodeIndex node : tree.internal_nodes()) s += log_split_prob(node.level);
  for (NodeIndex node : tree.external_nodes()) s += log_stop_prob(node.level);
  return s;
}

double GaltonWatsonPrior::log_grow_ratio(NodeIndex node) const {
  return log_split_prob(node.level) - log_stop_prob(node.level) +
         2.0 * log_stop_prob(node.level + 1);
}

}  // namespace spadapt
