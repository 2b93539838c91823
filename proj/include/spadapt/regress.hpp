#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spadapt/signals.hpp"
#include "spadapt/summary.hpp"
#include "spadapt/tree.hpp"

namespace spadapt {

/// Haar design matrix with x_ij = psi_lk(x_i), j = 2^l + k, stored implicitly:
/// row i has one nonzero per level, fixed by the cell containing x_i.
struct WaveletDesign {
  std::vector<double> x;
  int max_level = -1;
  /// Per flat node (slot 0 = scaling): n_lk, n_lk^L, n_lk^R.
  std::vector<long> count, count_left, count_right;
  /// Nodes with an empty child cell; non-empty means the design is unusable.
  std::vector<NodeIndex> empty_nodes;

  std::size_t n() const { return x.size(); }
  bool valid() const { return empty_nodes.empty(); }
  long count_min(NodeIndex node) const;
  long count_max(NodeIndex node) const;

  /// psi_node(x_i), following the locate() cell convention.
  double value(std::size_t i, NodeIndex node) const;
  Eigen::VectorXd column(NodeIndex node) const;
  /// X_a' X_b in closed form from the counts.
  double gram(NodeIndex a, NodeIndex b) const;
  /// X' y for every node, flat index.
  std::vector<double> cross(std::span<const double> y) const;
};

/// Level cap from p = floor(C* sqrt(n / log n)) rounded down to a power of two.
int default_design_level(std::size_t n, double c_star = 1.0);

/// max_level < 0 selects default_design_level(n). Throws ShapeError on an
/// empty design or points outside [0, 1]; empty cells land in empty_nodes.
WaveletDesign build_design(std::span<const double> x, int max_level = -1);

struct BalanceOptions {
  double upsilon = 0.5;
  double c = 0.1;
  double C = 1.0;
  double C_d = 2.0;
  /// Deepest level checked; < 0 selects floor(log2(n / (4 log n))).
  int level_cap = -1;
};

struct BalanceReport {
  bool passed = true;
  bool counts_ok = true;      // c n / 2^l <= n_min <= n_max <= (C + l) n / 2^l
  bool imbalance_ok = true;   // n_max - n_min <= C_d sqrt(n) log^upsilon(n) / 2^{l/2}
  int level_cap = 0;
  double worst_lower_ratio = INFINITY;  // min n_min / (c n / 2^l)
  double worst_upper_ratio = 0.0;       // max n_max / ((C + l) n / 2^l)
  double worst_imbalance_ratio = 0.0;   // max (n_max - n_min) / bound
  std::vector<NodeIndex> offending;
};

BalanceReport check_balance(std::span<const double> x, const BalanceOptions& options = {});
BalanceReport check_balance(const WaveletDesign& design, const BalanceOptions& options = {});

/// Column set of a tree: the scaling column followed by internal nodes.
std::vector<NodeIndex> tree_columns(const DyadicTree& tree);
Eigen::MatrixXd tree_gram(const WaveletDesign& design, const DyadicTree& tree);

struct EigenBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Gershgorin bracket of the spectrum of X_T' X_T.
EigenBounds gershgorin_bounds(const WaveletDesign& design, const DyadicTree& tree);

struct GPriorSpec {
  double g = 0.0;  // <= 0 selects the unit-information value g = n
  double resolve(std::size_t n) const { return g > 0.0 ? g : static_cast<double>(n); }
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// log N_T(Y) with Sigma_T = c (X_T' X_T)^{-1}, c = g / (g + 1).
double log_marginal(const WaveletDesign& design, const DyadicTree& tree, std::span<const double> y,
                    const GPriorSpec& gspec = {});

/// Y' P_T Y from a fresh factorization.
double projected_energy(const WaveletDesign& design, const DyadicTree& tree,
                        std::span<const double> y);

/// |X_j'(I - P_T) Y|^2 / X_j'(I - P_T) X_j for adding column `node` to `tree`.
double rank_one_gain(const WaveletDesign& design, const DyadicTree& tree, NodeIndex node,
                     std::span<const double> y);

/// Cholesky factor of a Gram matrix that grows and shrinks one column at a
/// time. Tracks z = L^{-1} b so that b' G^{-1} b = |z|^2.
class GrowableCholesky {
 public:
  std::size_t size() const { return static_cast<std::size_t>(L_.rows()); }
  /// Appends a column with Gram entries `cross` (against the current columns),
  /// diagonal `diag` and response inner product `b`. Returns the quadratic-form gain.
  double append(const Eigen::VectorXd& cross, double diag, double b);
  /// Gain from appending without modifying the factor.
  double peek_gain(const Eigen::VectorXd& cross, double diag, double b, double* pivot = nullptr) const;
  /// Removes column `pos` by Givens rotations.
  void remove(std::size_t pos);
  void reset(const Eigen::MatrixXd& gram, const Eigen::VectorXd& b);

  double quadratic() const { return z_.squaredNorm(); }
  double log_det() const;
  /// G^{-1} b.
  Eigen::VectorXd solve() const;

 private:
  Eigen::MatrixXd L_;
  Eigen::VectorXd b_;
  Eigen::VectorXd z_;
};

struct MhOptions {
  std::size_t iterations = 20000;
  double burn_in_fraction = 0.2;
  std::size_t refactor_every = 512;
  bool record_states = false;
  std::size_t trace_points = 1000;
};

struct MhFit : PosteriorSummary {
  WaveletDesign design;
  /// Posterior mean of X_T beta_T at the design points.
  std::vector<double> fitted;
  double acceptance_rate = 0.0;
  std::size_t burn_in = 0;
  std::vector<double> log_posterior_trace;
  /// Kept-iteration visit frequencies keyed by DyadicTree::key().
  std::map<std::string, double> state_frequency;
  std::vector<std::string> warnings;
};

/// Metropolis-Hastings over trees with grow / prune / stay moves.
/// prior.max_level < 0 uses the design's level cap.
MhFit fit_mh(const Dataset& data, GaltonWatsonPrior prior, const GPriorSpec& gspec,
             std::uint64_t seed, const MhOptions& options = {}, int design_level = -1);

}  // namespace spadapt
