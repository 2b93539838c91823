#include "spadapt/dyadic.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace spadapt {

std::size_t flat_index(NodeIndex node) {
  if (node.level < 0) return 0;
  return (std::size_t{1} << node.level) + static_cast<std::size_t>(node.k);
}

NodeIndex node_at(std::size_t flat) {
  if (flat == 0) return {-1, 0};
  const int level = std::bit_width(flat) - 1;
  return {level, static_cast<long>(flat - (std::size_t{1} << level))};
}

bool is_valid(NodeIndex node) {
  if (node.level == -1) return node.k == 0;
  if (node.level < -1 || node.level > 62) return false;
  return node.k >= 0 && node.k < (1L << node.level);
}

void require_valid(NodeIndex node) {
  if (!is_valid(node)) {
    throw std::domain_error("invalid Haar node (" + std::to_string(node.level) + ", " +
                            std::to_string(node.k) + ")");
  }
}

bool is_descendant(NodeIndex desc, NodeIndex anc) {
  if (desc.level <= anc.level) return false;
  if (anc.level < 0) return true;
  return (desc.k >> (desc.level - anc.level)) == anc.k;
}

bool DyadicInterval::contains(double x) const {
  if (x == 0.0 && lo == 0.0) return true;
  return x > lo && x <= hi;
}

DyadicInterval interval_of(NodeIndex node) {
  require_valid(node);
  if (node.level < 0) return {0.0, 1.0};
  const double width = std::ldexp(1.0, -node.level);
  return {static_cast<double>(node.k) * width, static_cast<double>(node.k + 1) * width};
}

long locate(int level, double x) {
  if (level < 0) return 0;
  const long cells = 1L << level;
  // (k 2^-l, (k+1) 2^-l] contains x  <=>  k = ceil(x 2^l) - 1
  long k = static_cast<long>(std::ceil(std::ldexp(x, level))) - 1;
  if (k < 0) k = 0;
  if (k >= cells) k = cells - 1;
  return k;
}

double eval_haar(NodeIndex node, double x) {
  require_valid(node);
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("eval_haar: x outside [0, 1]");
  if (node.level < 0) return 1.0;
  const double scaled = std::ldexp(x, node.level) - static_cast<double>(node.k);
  const double amp = std::sqrt(std::ldexp(1.0, node.level));
  if (x == 0.0 && node.k == 0) return amp;
  if (scaled > 0.0 && scaled <= 0.5) return amp;
  if (scaled > 0.5 && scaled <= 1.0) return -amp;
  return 0.0;
}

MultiscaleVector::MultiscaleVector(int max_level)
    : max_level_(max_level), values_(std::size_t{1} << (max_level + 1), 0.0) {
  if (max_level < -1 || max_level > 40) throw ShapeError("MultiscaleVector: bad max_level");
}

MultiscaleVector::MultiscaleVector(int max_level, std::vector<double> values)
    : max_level_(max_level), values_(std::move(values)) {
  if (max_level < -1 || max_level > 40) throw ShapeError("MultiscaleVector: bad max_level");
  if (values_.size() != (std::size_t{1} << (max_level + 1))) {
    throw ShapeError("MultiscaleVector: coefficient map is incomplete for max_level " +
                     std::to_string(max_level));
  }
}

double MultiscaleVector::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

int exact_log2(std::size_t n) {
  if (n == 0 || !std::has_single_bit(n)) {
    throw ShapeError("length " + std::to_string(n) + " is not a power of two");
  }
  return std::bit_width(n) - 1;
}

MultiscaleVector forward(std::span<const double> samples) {
  const int levels = exact_log2(samples.size());
  if (levels == 0) throw ShapeError("forward: need at least two samples");
  const int max_level = levels - 1;
  MultiscaleVector beta(max_level);

  // Block integrals of the step function, refined level by level upwards.
  const double cell = 1.0 / static_cast<double>(samples.size());
  std::vector<double> sums(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) sums[i] = samples[i] * cell;

  for (int l = max_level; l >= 0; --l) {
    const std::size_t count = std::size_t{1} << l;
    const double amp = std::sqrt(std::ldexp(1.0, l));
    for (std::size_t k = 0; k < count; ++k) {
      const double left = sums[2 * k];
      const double right = sums[2 * k + 1];
      beta.at_flat(count + k) = amp * (left - right);
      sums[k] = left + right;
    }
  }
  beta.at_flat(0) = sums[0];
  return beta;
}

namespace {

std::vector<double> reconstruct(const MultiscaleVector& beta, int keep_below) {
  const int max_level = beta.max_level();
  std::vector<double> cells(std::size_t{1} << (max_level + 1), 0.0);
  cells[0] = beta.at_flat(0);
  // Top-down: each level splits every cell value m into m +- 2^{l/2} beta_lk.
  for (int l = 0; l <= max_level; ++l) {
    const std::size_t count = std::size_t{1} << l;
    const double amp = std::sqrt(std::ldexp(1.0, l));
    for (std::size_t k = count; k-- > 0;) {
      const double m = cells[k];
      const double d = l < keep_below ? amp * beta.at_flat(count + k) : 0.0;
      cells[2 * k] = m + d;
      cells[2 * k + 1] = m - d;
    }
  }
  return cells;
}

}  // namespace

std::vector<double> inverse(const MultiscaleVector& beta) {
  if (beta.size() != (std::size_t{1} << (beta.max_level() + 1)) || beta.max_level() < 0) {
    throw ShapeError("inverse: incomplete coefficient map");
  }
  return reconstruct(beta, beta.max_level() + 1);
}

std::vector<double> project_level(const MultiscaleVector& beta, int j) {
  if (j < 0 || j > beta.max_level() + 1) {
    throw std::out_of_range("project_level: j must lie in [0, L_max + 1]");
  }
  return reconstruct(beta, j);
}

std::vector<double> grid_points(std::size_t cells) {
  std::vector<double> x(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    x[i] = static_cast<double>(i + 1) / static_cast<double>(cells);
  }
  return x;
}

}  // namespace spadapt
