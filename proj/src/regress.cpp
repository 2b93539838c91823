#include "spadapt/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spadapt/rng.hpp"

namespace spadapt {

namespace {

std::string node_name(NodeIndex node) {
  return std::to_string(node.level) + ":" + std::to_string(node.k);
}

bool in_left_half(NodeIndex anc, NodeIndex desc) {
  const long k = desc.k >> (desc.level - anc.level - 1);
  return (k & 1) == 0;
}

}  // namespace

long WaveletDesign::count_min(NodeIndex node) const {
  const std::size_t j = flat_index(node);
  return std::min(count_left[j], count_right[j]);
}

long WaveletDesign::count_max(NodeIndex node) const {
  const std::size_t j = flat_index(node);
  return std::max(count_left[j], count_right[j]);
}

double WaveletDesign::value(std::size_t i, NodeIndex node) const {
  if (node.level < 0) return 1.0;
  if (locate(node.level, x[i]) != node.k) return 0.0;
  const double amp = std::exp2(0.5 * node.level);
  return (locate(node.level + 1, x[i]) % 2 == 0) ? amp : -amp;
}

Eigen::VectorXd WaveletDesign::column(NodeIndex node) const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(n()));
  for (std::size_t i = 0; i < n(); ++i) c[static_cast<Eigen::Index>(i)] = value(i, node);
  return c;
}

double WaveletDesign::gram(NodeIndex a, NodeIndex b) const {
  if (a == b) {
    return a.level < 0 ? static_cast<double>(n())
                       : std::exp2(a.level) * static_cast<double>(count[flat_index(a)]);
  }
  if (b.level < a.level) std::swap(a, b);
  if (!is_descendant(b, a)) return 0.0;
  const std::size_t jb = flat_index(b);
  const double diff = static_cast<double>(count_left[jb] - count_right[jb]);
  if (a.level < 0) return std::exp2(0.5 * b.level) * diff;
  const double sign = in_left_half(a, b) ? 1.0 : -1.0;
  return sign * std::exp2(0.5 * (a.level + b.level)) * diff;
}

std::vector<double> WaveletDesign::cross(std::span<const double> y) const {
  if (y.size() != n()) throw ShapeError("WaveletDesign::cross: response length mismatch");
  std::vector<double> out(std::size_t{1} << (max_level + 1), 0.0);
  for (std::size_t i = 0; i < n(); ++i) {
    out[0] += y[i];
    for (int l = 0; l <= max_level; ++l) out[flat_index({l, locate(l, x[i])})] += value(i, {l, locate(l, x[i])}) * y[i];
  }
  return out;
}

int default_design_level(std::size_t n, double c_star) {
  if (n < 3) return 0;
  const double dn = static_cast<double>(n);
  const double p = std::floor(c_star * std::sqrt(dn / std::log(dn)));
  if (p < 2.0) return 0;
  return static_cast<int>(std::floor(std::log2(p)));
}

WaveletDesign build_design(std::span<const double> x, int max_level) {
  if (x.empty()) throw ShapeError("build_design: empty design");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw ShapeError("build_design: design point outside [0, 1]");
  }
  WaveletDesign d;
  d.x.assign(x.begin(), x.end());
  d.max_level = max_level < 0 ? default_design_level(x.size()) : max_level;
  const std::size_t size = std::size_t{1} << (d.max_level + 1);
  d.count.assign(size, 0);
  d.count_left.assign(size, 0);
  d.count_right.assign(size, 0);
  d.count[0] = static_cast<long>(x.size());
  for (double v : x) {
    for (int l = 0; l <= d.max_level; ++l) {
      const std::size_t j = flat_index({l, locate(l, v)});
      ++d.count[j];
      if (locate(l + 1, v) % 2 == 0) {
        ++d.count_left[j];
      } else {
        ++d.count_right[j];
      }
    }
  }
  // The scaling column splits at (0, 0).
  d.count_left[0] = d.count[1];
  d.count_right[0] = 0;
  for (std::size_t j = 1; j < size; ++j) {
    if (d.count_left[j] == 0 || d.count_right[j] == 0) d.empty_nodes.push_back(node_at(j));
  }
  return d;
}

BalanceReport check_balance(std::span<const double> x, const BalanceOptions& o) {
  const double n = static_cast<double>(x.size());
  BalanceReport rep;
  rep.level_cap = o.level_cap >= 0
                      ? o.level_cap
                      : std::max(0, static_cast<int>(std::floor(std::log2(n / (4.0 * std::log(n))))));
  const WaveletDesign d = build_design(x, rep.level_cap);
  for (int l = 0; l <= rep.level_cap; ++l) {
    const double scale = n / std::exp2(l);
    const double lower = o.c * scale;
    const double upper = (o.C + l) * scale;
    const double imbalance = o.C_d * std::sqrt(n) * std::pow(std::log(n), o.upsilon) / std::exp2(0.5 * l);
    for (long k = 0; k < (1L << l); ++k) {
      const NodeIndex node{l, k};
      const double lo = static_cast<double>(d.count_min(node));
      const double hi = static_cast<double>(d.count_max(node));
      rep.worst_lower_ratio = std::min(rep.worst_lower_ratio, lo / lower);
      rep.worst_upper_ratio = std::max(rep.worst_upper_ratio, hi / upper);
      rep.worst_imbalance_ratio = std::max(rep.worst_imbalance_ratio, (hi - lo) / imbalance);
      const bool counts = lo >= lower && hi <= upper;
      const bool balanced = hi - lo <= imbalance;
      rep.counts_ok = rep.counts_ok && counts;
      rep.imbalance_ok = rep.imbalance_ok && balanced;
      if (!counts || !balanced) rep.offending.push_back(node);
    }
  }
  rep.passed = rep.counts_ok && rep.imbalance_ok;
  return rep;
}

BalanceReport check_balance(const WaveletDesign& design, const BalanceOptions& options) {
  return check_balance(design.x, options);
}

std::vector<NodeIndex> tree_columns(const DyadicTree& tree) {
  std::vector<NodeIndex> cols{{-1, 0}};
  for (NodeIndex node : tree.internal_nodes()) cols.push_back(node);
  return cols;
}

Eigen::MatrixXd tree_gram(const WaveletDesign& design, const DyadicTree& tree) {
  const std::vector<NodeIndex> cols = tree_columns(tree);
  const auto k = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd G(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      G(a, b) = G(b, a) = design.gram(cols[a], cols[b]);
    }
  }
  return G;
}

EigenBounds gershgorin_bounds(const WaveletDesign& design, const DyadicTree& tree) {
  const Eigen::MatrixXd G = tree_gram(design, tree);
  EigenBounds e{INFINITY, -INFINITY};
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    const double off = G.row(i).cwiseAbs().sum() - std::abs(G(i, i));
    e.lower = std::min(e.lower, G(i, i) - off);
    e.upper = std::max(e.upper, G(i, i) + off);
  }
  return e;
}

namespace {

double quadratic_form(const WaveletDesign& design, const DyadicTree& tree,
                      std::span<const double> y) {
  const std::vector<NodeIndex> cols = tree_columns(tree);
  const std::vector<double> b_all = design.cross(y);
  Eigen::VectorXd b(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) b[static_cast<Eigen::Index>(i)] = b_all[flat_index(cols[i])];
  const Eigen::LLT<Eigen::MatrixXd> llt(tree_gram(design, tree));
  if (llt.info() != Eigen::Success) {
    throw NumericError("log_marginal: singular Gram matrix for tree " + tree.key());
  }
  const Eigen::MatrixXd L = llt.matrixL();
  if (L.diagonal().minCoeff() <= 1e-10 * std::sqrt(static_cast<double>(design.n()))) {
    throw NumericError("log_marginal: singular Gram matrix for tree " + tree.key());
  }
  return b.dot(llt.solve(b));
}

}  // namespace

double projected_energy(const WaveletDesign& design, const DyadicTree& tree,
                        std::span<const double> y) {
  return quadratic_form(design, tree, y);
}

double log_marginal(const WaveletDesign& design, const DyadicTree& tree, std::span<const double> y,
                    const GPriorSpec& gspec) {
  if (tree.max_level() > design.max_level) {
    throw ShapeError("log_marginal: tree deeper than the design");
  }
  const double n = static_cast<double>(design.n());
  const double g = gspec.resolve(design.n());
  const double c = g / (g + 1.0);
  const double k = static_cast<double>(tree.internal_count() + 1);
  double yty = 0.0;
  for (double v : y) yty += v * v;
  const double quad = quadratic_form(design, tree, y);
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * k * std::log1p(g) -
         0.5 * (yty - c * quad);
}

double rank_one_gain(const WaveletDesign& design, const DyadicTree& tree, NodeIndex node,
                     std::span<const double> y) {
  const std::vector<NodeIndex> cols = tree_columns(tree);
  const auto n = static_cast<Eigen::Index>(design.n());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) X.col(static_cast<Eigen::Index>(c)) = design.column(cols[c]);
  const Eigen::Map<const Eigen::VectorXd> Y(y.data(), n);
  const Eigen::VectorXd xj = design.column(node);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::VectorXd ry = Y - X * qr.solve(Y);
  const Eigen::VectorXd rx = xj - X * qr.solve(xj);
  const double num = xj.dot(ry);
  return num * num / xj.dot(rx);
}

double GrowableCholesky::peek_gain(const Eigen::VectorXd& cross, double diag, double b,
                                   double* pivot) const {
  double zk;
  double d2;
  if (size() == 0) {
    d2 = diag;
    zk = b;
  } else {
    const Eigen::VectorXd w = L_.triangularView<Eigen::Lower>().solve(cross);
    d2 = diag - w.squaredNorm();
    zk = b - w.dot(z_);
  }
  if (pivot) *pivot = d2;
  if (!(d2 > 1e-12 * std::max(1.0, diag))) {
    throw NumericError("GrowableCholesky: new column is linearly dependent");
  }
  return zk * zk / d2;
}

double GrowableCholesky::append(const Eigen::VectorXd& cross, double diag, double b) {
  const Eigen::Index k = L_.rows();
  Eigen::VectorXd w = k == 0 ? Eigen::VectorXd() : Eigen::VectorXd(L_.triangularView<Eigen::Lower>().solve(cross));
  const double d2 = diag - (k == 0 ? 0.0 : w.squaredNorm());
  if (!(d2 > 1e-12 * std::max(1.0, diag))) {
    throw NumericError("GrowableCholesky: new column is linearly dependent");
  }
  const double d = std::sqrt(d2);
  L_.conservativeResize(k + 1, k + 1);
  L_.row(k).setZero();
  L_.col(k).setZero();
  if (k > 0) L_.row(k).head(k) = w.transpose();
  L_(k, k) = d;
  const double zk = (b - (k == 0 ? 0.0 : w.dot(z_))) / d;
  b_.conservativeResize(k + 1);
  b_[k] = b;
  z_.conservativeResize(k + 1);
  z_[k] = zk;
  return zk * zk;
}

void GrowableCholesky::remove(std::size_t pos) {
  const Eigen::Index k = L_.rows();
  const auto p = static_cast<Eigen::Index>(pos);
  if (p >= k) throw std::out_of_range("GrowableCholesky::remove: bad position");
  Eigen::MatrixXd M(k - 1, k);
  M.topRows(p) = L_.topRows(p);
  M.bottomRows(k - 1 - p) = L_.bottomRows(k - 1 - p);
  for (Eigen::Index j = p; j < k - 1; ++j) {
    const double a = M(j, j);
    const double b = M(j, j + 1);
    const double r = std::hypot(a, b);
    if (r == 0.0) continue;
    const double c = a / r;
    const double s = b / r;
    for (Eigen::Index i = j; i < k - 1; ++i) {
      const double u = M(i, j);
      const double v = M(i, j + 1);
      M(i, j) = c * u + s * v;
      M(i, j + 1) = -s * u + c * v;
    }
  }
  L_ = M.leftCols(k - 1);
  for (Eigen::Index j = 0; j < L_.rows(); ++j) {
    if (L_(j, j) < 0) L_.col(j) *= -1.0;
  }
  Eigen::VectorXd nb(k - 1);
  nb.head(p) = b_.head(p);
  nb.tail(k - 1 - p) = b_.tail(k - 1 - p);
  b_ = nb;
  z_ = L_.triangularView<Eigen::Lower>().solve(b_);
}

void GrowableCholesky::reset(const Eigen::MatrixXd& gram, const Eigen::VectorXd& b) {
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericError("GrowableCholesky::reset: Gram matrix not positive definite");
  L_ = llt.matrixL();
  b_ = b;
  z_ = L_.triangularView<Eigen::Lower>().solve(b_);
}

double GrowableCholesky::log_det() const { return 2.0 * L_.diagonal().array().log().sum(); }

Eigen::VectorXd GrowableCholesky::solve() const {
  return L_.transpose().triangularView<Eigen::Upper>().solve(z_);
}

MhFit fit_mh(const Dataset& data, GaltonWatsonPrior prior, const GPriorSpec& gspec,
             std::uint64_t seed, const MhOptions& options, int design_level) {
  data.require_kind(ModelKind::regression, "regress::fit_mh");
  MhFit fit;
  fit.engine = "regress";
  fit.design = build_design(data.design, design_level);
  const WaveletDesign& design = fit.design;
  if (!design.valid()) {
    throw ValidationError("regress::fit_mh: design has an empty cell below node " +
                          node_name(design.empty_nodes.front()));
  }
  if (prior.max_level < 0) prior.max_level = design.max_level;
  if (prior.max_level > design.max_level) {
    throw ShapeError("regress::fit_mh: prior max_level exceeds the design level");
  }
  prior.validate();
  const int L = prior.max_level;
  fit.max_level = L;
  const double g = gspec.resolve(design.n());
  const double c = g / (g + 1.0);
  const double half_log_g = 0.5 * std::log1p(g);
  const std::vector<double> b_all = design.cross(data.y);
  double yty = 0.0;
  for (double v : data.y) yty += v * v;
  const double log_const = -0.5 * static_cast<double>(design.n()) * std::log(2.0 * std::numbers::pi) - 0.5 * yty;

  DyadicTree tree(L);
  std::vector<NodeIndex> cols{{-1, 0}};
  GrowableCholesky chol;
  auto refactor = [&]() {
    Eigen::VectorXd b(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) b[static_cast<Eigen::Index>(i)] = b_all[flat_index(cols[i])];
    chol.reset(tree_gram(design, tree), b);
  };
  auto cross_of = [&](NodeIndex node) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) v[static_cast<Eigen::Index>(i)] = design.gram(cols[i], node);
    return v;
  };
  refactor();
  // p_0 may be 1, so start from the root split whenever it is allowed.
  if (prior.split_prob(0) > 0.0) {
    chol.append(cross_of({0, 0}), design.gram({0, 0}, {0, 0}), b_all[1]);
    tree.grow({0, 0});
    cols.push_back({0, 0});
  }

  auto log_post = [&]() {
    const double k = static_cast<double>(cols.size());
    return prior.log_prior(tree) + log_const - k * half_log_g + 0.5 * c * chol.quadratic();
  };

  const std::size_t iters = options.iterations;
  fit.burn_in = static_cast<std::size_t>(std::floor(options.burn_in_fraction * static_cast<double>(iters)));
  if (iters <= fit.burn_in) fit.warnings.push_back("iterations do not exceed burn-in; no states kept");
  const std::size_t kept = iters > fit.burn_in ? iters - fit.burn_in : 0;
  const std::size_t trace_every = std::max<std::size_t>(1, iters / std::max<std::size_t>(1, options.trace_points));

  const std::size_t size = std::size_t{1} << (L + 1);
  std::vector<double> time_in(size, 0.0);
  Eigen::VectorXd beta_now = c * chol.solve();
  std::vector<double> beta_sum(size, 0.0);
  double internal_sum = 0.0;

  CounterRng rng(seed, 0x3C);
  std::size_t proposed = 0, accepted = 0, moves_since_refactor = 0;
  for (std::size_t t = 0; t < iters; ++t) {
    const double u = rng.uniform();
    bool changed = false;
    if (u < 0.45) {
      const std::vector<NodeIndex> growable = tree.growable_nodes();
      if (!growable.empty()) {
        ++proposed;
        const NodeIndex node = growable[rng.below(growable.size())];
        const Eigen::VectorXd cr = cross_of(node);
        const double diag = design.gram(node, node);
        const double bj = b_all[flat_index(node)];
        const double gain = chol.peek_gain(cr, diag, bj);
        DyadicTree next = tree;
        next.grow(node);
        const double log_alpha = prior.log_grow_ratio(node) - half_log_g + 0.5 * c * gain +
                                 std::log(static_cast<double>(growable.size())) -
                                 std::log(static_cast<double>(next.preterminal_nodes().size()));
        if (std::log(rng.uniform()) < log_alpha) {
          chol.append(cr, diag, bj);
          tree = std::move(next);
          cols.push_back(node);
          changed = true;
        }
      }
    } else if (u < 0.9) {
      const std::vector<NodeIndex> pre = tree.preterminal_nodes();
      if (!pre.empty()) {
        ++proposed;
        const NodeIndex node = pre[rng.below(pre.size())];
        const auto pos = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), node) - cols.begin());
        GrowableCholesky smaller = chol;
        smaller.remove(pos);
        const double loss = chol.quadratic() - smaller.quadratic();
        DyadicTree next = tree;
        next.prune(node);
        const double log_alpha = -prior.log_grow_ratio(node) + half_log_g - 0.5 * c * loss +
                                 std::log(static_cast<double>(pre.size())) -
                                 std::log(static_cast<double>(next.growable_nodes().size()));
        if (std::log(rng.uniform()) < log_alpha) {
          chol = std::move(smaller);
          tree = std::move(next);
          cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(pos));
          changed = true;
        }
      }
    }
    if (changed) {
      ++accepted;
      if (++moves_since_refactor >= options.refactor_every) {
        refactor();
        moves_since_refactor = 0;
      }
      beta_now = c * chol.solve();
    }
    if (t % trace_every == 0) fit.log_posterior_trace.push_back(log_post());
    if (t < fit.burn_in) continue;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::size_t j = flat_index(cols[i]);
      beta_sum[j] += beta_now[static_cast<Eigen::Index>(i)];
      if (i > 0) time_in[j] += 1.0;
    }
    internal_sum += static_cast<double>(tree.internal_count());
    if (options.record_states) fit.state_frequency[tree.key()] += 1.0;
  }

  fit.acceptance_rate = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  const double denom = kept ? static_cast<double>(kept) : 1.0;
  fit.inclusion.assign(size, 0.0);
  fit.inclusion[0] = 1.0;
  fit.coef_mean = MultiscaleVector(L);
  MultiscaleVector mean(L);
  for (std::size_t j = 0; j < size; ++j) {
    if (j > 0) fit.inclusion[j] = time_in[j] / denom;
    mean.at_flat(j) = beta_sum[j] / denom;
    const double visits = j == 0 ? denom : time_in[j];
    fit.coef_mean.at_flat(j) = visits > 0 ? beta_sum[j] / visits : 0.0;
  }
  for (auto& [key, v] : fit.state_frequency) v /= denom;
  fit.point_estimate = inverse(mean);
  fit.fitted.assign(design.n(), 0.0);
  for (std::size_t i = 0; i < design.n(); ++i) {
    double s = mean.at_flat(0);
    for (int l = 0; l <= L; ++l) {
      const NodeIndex node{l, locate(l, design.x[i])};
      s += mean[node] * design.value(i, node);
    }
    fit.fitted[i] = s;
  }
  fit.diagnostics["acceptance_rate"] = fit.acceptance_rate;
  fit.diagnostics["burn_in"] = static_cast<double>(fit.burn_in);
  fit.diagnostics["iterations"] = static_cast<double>(iters);
  fit.diagnostics["g"] = g;
  fit.diagnostics["mean_internal_nodes"] = internal_sum / denom;
  return fit;
}

}  // namespace spadapt
