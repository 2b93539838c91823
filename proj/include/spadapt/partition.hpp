#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spadapt/parallel.hpp"
#include "spadapt/signals.hpp"
#include "spadapt/slab.hpp"

namespace spadapt {

/// Candidate knots 0 = z_0 < ... < z_N = 1.
struct KnotGrid {
  std::vector<double> z;
  /// Spacing constants: min and max of (z_{l+1} - z_l) n / log n.
  double c_lower = 0.0;
  double c_upper = 0.0;

  std::size_t cells() const { return z.size() - 1; }
  /// Index of the cell (z_{i-1}, z_i] holding x, 1-based; x = 0 goes to cell 1.
  std::size_t cell_of(double x) const;
  void record_spacing(std::size_t n);
};

/// Knots at every ceil(C log n)-th order statistic of the design, with a short
/// final remainder merged into the last cell.
KnotGrid order_statistic_grid(std::span<const double> sorted_x, double C = 2.0);
KnotGrid regular_grid(std::size_t cells, std::size_t n = 0);

/// Prefix sums over the data, aligned with the grid.
class SegmentData {
 public:
  SegmentData(const KnotGrid& grid, std::span<const double> x, std::span<const double> y);

  struct Stats {
    long count = 0;
    double mean = 0.0;
    double rss = 0.0;
  };
  /// Statistics of the segment (z_i, z_j], i < j.
  Stats stats(std::size_t i, std::size_t j) const;

 private:
  std::vector<long> count_;
  std::vector<double> sum_, sumsq_;
  double shift_ = 0.0;
};

/// log m(I) = -rss/2 + log int exp(-n_I (beta - ybar)^2 / 2) g(beta) d beta.
/// Throws std::domain_error for an empty segment.
double segment_log_marginal(const SegmentData::Stats& stats, const Slab& slab);

enum class SizeMeasure { length, units };

struct PartitionPrior {
  double B = 10.0;
  SizeMeasure size = SizeMeasure::length;
  Slab slab{SlabKind::gaussian, 10.0, 30.0};

  /// B log |I| for the segment (z_i, z_j].
  double log_size(const KnotGrid& grid, std::size_t i, std::size_t j) const;
};

struct PartitionFit {
  KnotGrid grid;
  PartitionPrior prior;
  /// log of sum over partitions of prod |I|^B m(I).
  double log_normalizer = 0.0;
  /// P(segment (z_i, z_j] is a block | Y), row-major (N + 1) x (N + 1).
  std::vector<double> segment_prob;
  std::vector<std::size_t> map_breaks;
  double expected_segments = 0.0;
  /// Posterior mean of f on each knot cell (cell c = (z_{c-1}, z_c], 1-based, entry c - 1).
  std::vector<double> cell_estimate;
  std::vector<double> fitted;  // at the design points

  double prob(std::size_t i, std::size_t j) const { return segment_prob[i * grid.z.size() + j]; }
  double evaluate(double x) const { return cell_estimate[grid.cell_of(x) - 1]; }
  /// Estimate on the right endpoints of a regular grid with `cells` cells.
  std::vector<double> on_grid(std::size_t cells) const;

  // Kept for sampling.
  std::vector<double> log_forward;
  std::vector<double> log_weight;  // (N + 1) x (N + 1), -inf when invalid
};

PartitionFit fit_dp(const Dataset& data, const KnotGrid& grid, const PartitionPrior& prior = {},
                    Exec exec = Exec::parallel);

/// Exact posterior partition draws (break indices including 0 and N).
std::vector<std::vector<std::size_t>> sample_partitions(const PartitionFit& fit, std::size_t m,
                                                        std::uint64_t seed);

/// sup over the regular n-cell grid of |f_hat - f_0| / local_rate.
double rate_diag(const PartitionFit& fit, const RealFunction& truth, const HolderProfile& profile,
                 std::size_t n);

}  // namespace spadapt
