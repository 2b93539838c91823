#include "verify/acceptance.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "oracle/oracles.hpp"
#include "spadapt/bcart.hpp"
#include "spadapt/dyadic.hpp"
#include "spadapt/partition.hpp"
#include "spadapt/regress.hpp"
#include "spadapt/rng.hpp"
#include "spadapt/spikeslab.hpp"
#include "verify/experiments.hpp"

namespace spadapt::verify {
namespace {

Dataset random_white_noise(int max_level, CounterRng& rng) {
  const std::size_t n = std::size_t{1} << max_level;
  Dataset d;
  d.kind = ModelKind::white_noise;
  d.n = n;
  d.max_level = max_level;
  d.y.resize(2 * n);
  // Mix of clear signal and noise-level coefficients so both tails of the
  // inclusion probabilities are exercised.
  for (auto& y : d.y) {
    const double signal = rng.uniform() < 0.4 ? 2.0 * rng.normal() : 0.0;
    y = signal + rng.normal() / std::sqrt(static_cast<double>(n));
  }
  return d;
}

Dataset regression_on(std::vector<double> x, const RealFunction& f, CounterRng& rng) {
  Dataset d;
  d.kind = ModelKind::regression;
  d.n = x.size();
  for (double xi : x) d.y.push_back(f(xi) + rng.normal());
  d.design = std::move(x);
  return d;
}

DyadicTree random_step(DyadicTree t, CounterRng& rng, NodeIndex& changed, bool& grew) {
  const auto growable = t.growable_nodes();
  const auto prunable = t.preterminal_nodes();
  grew = prunable.empty() || (!growable.empty() && rng.uniform() < 0.6);
  if (grew) {
    changed = growable[rng.below(growable.size())];
    t.grow(changed);
  } else {
    changed = prunable[rng.below(prunable.size())];
    t.prune(changed);
  }
  return t;
}

void haar_exactness(const VerifyOptions& o, CriterionResult& r) {
  const std::size_t N = 2048;
  CounterRng rng(o.seed, 1);
  double round_trip = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v(N);
    for (double& x : v) x = rng.normal();
    const auto back = inverse(forward(v));
    for (std::size_t i = 0; i < N; ++i) round_trip = std::max(round_trip, std::abs(back[i] - v[i]));
  }
  // Inner products of every pair of basis functions whose supports meet, on
  // the fine grid where all of them are constant; disjoint pairs are zero.
  const std::size_t cells = N;
  std::vector<std::vector<double>> values(N);
  for (std::size_t j = 0; j < N; ++j) {
    values[j].resize(cells);
    for (std::size_t c = 0; c < cells; ++c) values[j][c] = eval_haar(node_at(j), (c + 0.5) / double(cells));
  }
  double ortho = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t b = a; b < N; ++b) {
      const NodeIndex na = node_at(a), nb = node_at(b);
      const bool overlap = a == b || a == 0 || is_descendant(nb, na);
      double ip = 0.0;
      if (overlap) {
        for (std::size_t c = 0; c < cells; ++c) ip += values[a][c] * values[b][c];
        ip /= double(cells);
        ++pairs;
      }
      ortho = std::max(ortho, std::abs(ip - (a == b ? 1.0 : 0.0)));
    }
  }
  r.measured = std::max(round_trip, ortho);
  r.tolerance = 1e-12;
  r.comparison = "<";
  r.passed = round_trip < 1e-12 && ortho < 1e-12;
  std::ostringstream d;
  d << "round-trip " << round_trip << ", orthonormality " << ortho << " over " << pairs
    << " overlapping pairs";
  r.detail = d.str();
}

void bcart_oracle(const VerifyOptions& o, CriterionResult& r) {
  CounterRng rng(o.seed, 2);
  double worst_inc = 0.0, worst_ev = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Dataset d = random_white_noise(3, rng);
    const GaltonWatsonPrior prior{2.2 + 4.0 * rng.uniform(), rep % 2 ? SplitDecay::quadratic : SplitDecay::linear, 3};
    const BcartFit fit = fit_exact(d, prior);
    const oracle::NodePosterior ref = oracle::enumerate_bcart(d, prior);
    for (std::size_t j = 0; j < ref.inclusion.size(); ++j)
      worst_inc = std::max(worst_inc, std::abs(fit.inclusion[j] - ref.inclusion[j]));
    worst_ev = std::max(worst_ev, std::abs(fit.log_evidence - ref.log_normalizer));
  }
  r.measured = std::max(worst_inc, worst_ev);
  r.tolerance = 1e-10;
  r.comparison = "<=";
  r.passed = r.measured <= r.tolerance;
  std::ostringstream d;
  d << "inclusion " << worst_inc << ", log-evidence " << worst_ev << " over 50 datasets, 677 trees each";
  r.detail = d.str();
}

void spikeslab_oracle(const VerifyOptions& o, CriterionResult& r) {
  CounterRng rng(o.seed, 3);
  double worst_inc = 0.0, worst_ev = 0.0, worst_mean = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Dataset d = random_white_noise(3, rng);
    SpikeSlabPrior prior = SpikeSlabPrior::relaxed(8.0, 3);
    if (rep % 2) prior.slab = Slab{SlabKind::uniform, 1.0, 4.0};
    const SpikeSlabFit fit = fit_spikeslab(d, prior);
    const oracle::NodePosterior ref = oracle::enumerate_spikeslab(d, prior);
    for (std::size_t j = 0; j < ref.inclusion.size(); ++j) {
      worst_inc = std::max(worst_inc, std::abs(fit.inclusion[j] - ref.inclusion[j]));
      if (j > 0 && j < ref.mean.size() && std::isfinite(ref.mean[j])) {
        const double mine = fit.inclusion[j] * fit.coef_mean.at_flat(j);
        worst_mean = std::max(worst_mean, std::abs(mine - ref.mean[j]) / std::max(1.0, std::abs(ref.mean[j])));
      }
    }
    worst_ev = std::max(worst_ev, std::abs(fit.log_evidence - ref.log_normalizer) /
                                      std::max(1.0, std::abs(ref.log_normalizer)));
  }
  r.measured = std::max({worst_inc, worst_ev, worst_mean});
  r.tolerance = 1e-12;
  r.comparison = "<=";
  r.passed = r.measured <= r.tolerance;
  std::ostringstream d;
  d << "inclusion " << worst_inc << ", log-normalizer (rel) " << worst_ev << ", mean " << worst_mean
    << " over 20 datasets, 32768 subsets each";
  r.detail = d.str();
}

void partition_oracle(const VerifyOptions& o, CriterionResult& r) {
  CounterRng rng(o.seed, 4);
  double worst_p = 0.0, worst_z = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 40 + rng.below(60);
    const double jump = rng.uniform();
    const double level = 2.0 * rng.normal();
    Dataset d = regression_on(make_design(rep % 2 ? DesignKind::uniform : DesignKind::regular, n, rng()),
                              [&](double x) { return x < jump ? level : -level + x; }, rng);
    const KnotGrid grid = regular_grid(10, n);
    // Every cell must hold data for the enumeration to be defined.
    SegmentData probe(grid, d.design, d.y);
    bool empty = false;
    for (std::size_t c = 0; c < 10; ++c) empty = empty || probe.stats(c, c + 1).count == 0;
    if (empty) {
      --rep;
      continue;
    }
    PartitionPrior prior;
    prior.B = 1.0 + 10.0 * rng.uniform();
    if (rep % 3 == 0) prior.size = SizeMeasure::units;
    if (rep % 4 == 1) prior.slab = Slab{SlabKind::uniform, 1.0, 8.0};
    const PartitionFit fit = fit_dp(d, grid, prior);
    const oracle::PartitionPosterior ref = oracle::enumerate_partitions(d, grid, prior);
    for (std::size_t i = 0; i < ref.segment_prob.size(); ++i)
      worst_p = std::max(worst_p, std::abs(fit.segment_prob[i] - ref.segment_prob[i]));
    worst_z = std::max(worst_z, std::abs(fit.log_normalizer - ref.log_normalizer) /
                                    std::max(1.0, std::abs(ref.log_normalizer)));
  }
  r.measured = std::max(worst_p, worst_z);
  r.tolerance = 1e-9;
  r.comparison = "<=";
  r.passed = r.measured <= r.tolerance;
  std::ostringstream d;
  d << "segment probabilities " << worst_p << ", log-normalizer (rel) " << worst_z
    << " over 20 datasets, 512 partitions each";
  r.detail = d.str();
}

void gprior_marginal(const VerifyOptions& o, CriterionResult& r) {
  CounterRng rng(o.seed, 5);
  double worst_quad = 0.0;
  const std::vector<std::vector<NodeIndex>> trees{{}, {{0, 0}}, {{0, 0}, {1, 0}}, {{0, 0}, {1, 1}}};
  for (int rep = 0; rep < 5; ++rep) {
    const std::vector<double> x = make_design(DesignKind::uniform, 30 + 10 * rep, rng());
    const Dataset d = regression_on(x, [](double v) { return std::sin(7 * v); }, rng);
    const WaveletDesign design = build_design(x, 2);
    for (const auto& nodes : trees) {
      const DyadicTree t(2, nodes);
      for (double g : {double(x.size()), 3.0}) {
        const double exact = log_marginal(design, t, d.y, GPriorSpec{g});
        worst_quad = std::max(worst_quad, std::abs(exact - oracle::quadrature_log_marginal(design, t, d.y, g)));
      }
    }
  }
  const std::vector<double> x = make_design(DesignKind::uniform, 512, rng());
  const Dataset d = regression_on(x, doppler_function, rng);
  const WaveletDesign design = build_design(x, 4);
  double worst_rank = 0.0;
  for (int path = 0; path < 1000; ++path) {
    DyadicTree t(4);
    const int steps = 1 + static_cast<int>(rng.below(12));
    for (int s = 0; s < steps; ++s) {
      NodeIndex changed;
      bool grew;
      const DyadicTree next = random_step(t, rng, changed, grew);
      const DyadicTree& small = grew ? t : next;
      const DyadicTree& big = grew ? next : t;
      const double diff = projected_energy(design, big, d.y) - projected_energy(design, small, d.y);
      const double gain = rank_one_gain(design, small, changed, d.y);
      worst_rank = std::max(worst_rank, std::abs(diff - gain) / std::max(1.0, std::abs(diff)));
      t = next;
    }
  }
  r.measured = std::max(worst_quad / 1e-8, worst_rank / 1e-10);
  r.tolerance = 1.0;
  r.comparison = "<=";
  r.passed = worst_quad <= 1e-8 && worst_rank <= 1e-10;
  std::ostringstream dd;
  dd << "quadrature gap " << worst_quad << " (tol 1e-8), rank-one identity " << worst_rank
     << " (tol 1e-10, 1000 paths); measured is the larger error / tolerance";
  r.detail = dd.str();
}

void mh_stationarity(const VerifyOptions& o, CriterionResult& r) {
  CounterRng rng(o.seed, 6);
  const GaltonWatsonPrior prior{2.5, SplitDecay::linear, 2};
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> x(64);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = double(i + 1) / 64.0;
    const double shift = 0.2 + 0.6 * rng.uniform();
    const Dataset d = regression_on(x, [&](double v) { return v < 0.5 ? 0.0 : shift; }, rng);
    MhOptions opts;
    opts.iterations = 100000;
    opts.record_states = true;
    const MhFit fit = fit_mh(d, prior, GPriorSpec{}, rng(), opts, 2);
    const auto exact = oracle::enumerate_tree_posterior(build_design(x, 2), d.y, prior, GPriorSpec{});
    double tv = 0.0;
    for (const auto& [key, p] : exact) {
      const auto it = fit.state_frequency.find(key);
      tv += std::abs(p - (it == fit.state_frequency.end() ? 0.0 : it->second));
    }
    for (const auto& [key, q] : fit.state_frequency)
      if (!exact.count(key)) tv += q;
    worst = std::max(worst, 0.5 * tv);
  }
  r.measured = worst;
  r.tolerance = 0.05;
  r.comparison = "<";
  r.passed = worst < 0.05;
  r.detail = "largest total variation over 5 seeds, 26 trees, 1e5 iterations";
}

void design_diagnostics(const VerifyOptions& o, CriterionResult& r) {
  CounterRng rng(o.seed, 11);
  std::size_t bracket_fail = 0;
  double worst_slack = INFINITY;
  for (int pair = 0; pair < 200; ++pair) {
    const std::size_t n = 256 + rng.below(4096);
    const WaveletDesign d = build_design(make_design(DesignKind::uniform, n, rng()), 4);
    if (!d.valid()) {
      --pair;
      continue;
    }
    DyadicTree t(4);
    NodeIndex changed;
    bool grew;
    const int steps = 1 + static_cast<int>(rng.below(40));
    for (int s = 0; s < steps; ++s) t = random_step(t, rng, changed, grew);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tree_gram(d, t));
    const EigenBounds b = gershgorin_bounds(d, t);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    const double tol = 1e-9 * hi;
    if (b.lower > lo + tol || b.upper < hi - tol) ++bracket_fail;
    worst_slack = std::min({worst_slack, lo - b.lower, b.upper - hi});
  }
  int balanced = 0;
  for (int seed = 0; seed < 100; ++seed) {
    balanced += check_balance(make_design(DesignKind::uniform, 4096, derive_seed(o.seed, 1000 + seed))).passed;
  }
  r.measured = balanced;
  r.tolerance = 95;
  r.comparison = ">=";
  r.passed = bracket_fail == 0 && balanced >= 95;
  std::ostringstream dd;
  dd << "Gershgorin bracket failures " << bracket_fail << "/200 (smallest slack " << worst_slack
     << "); balanced uniform designs " << balanced << "/100";
  r.detail = dd.str();
}

struct Entry {
  int id;
  const char* name;
  Suite suite;
  void (*run)(const VerifyOptions&, CriterionResult&);
};

const Entry kEntries[] = {
    {1, "Haar exactness", Suite::oracle, haar_exactness},
    {2, "Bayesian CART oracle equivalence", Suite::oracle, bcart_oracle},
    {3, "spike-and-slab oracle equivalence", Suite::oracle, spikeslab_oracle},
    {4, "partition DP oracle equivalence", Suite::oracle, partition_oracle},
    {5, "g-prior marginal correctness", Suite::oracle, gprior_marginal},
    {6, "MH stationarity", Suite::oracle, mh_stationarity},
    {7, "rate slopes", Suite::rates, rate_slopes},
    {8, "spatial adaptation", Suite::rates, spatial_adaptation},
    {9, "band coverage", Suite::coverage, band_coverage},
    {10, "GP non-adaptation", Suite::rates, gp_non_adaptation},
    {11, "design diagnostics", Suite::design, design_diagnostics},
};

}  // namespace

Suite suite_from_string(const std::string& s) {
  if (s == "all") return Suite::all;
  if (s == "oracle") return Suite::oracle;
  if (s == "rates") return Suite::rates;
  if (s == "coverage") return Suite::coverage;
  if (s == "design") return Suite::design;
  throw std::invalid_argument("unknown suite '" + s + "' (oracle | rates | coverage | design | all)");
}

std::string to_string(Suite s) {
  switch (s) {
    case Suite::all: return "all";
    case Suite::oracle: return "oracle";
    case Suite::rates: return "rates";
    case Suite::coverage: return "coverage";
    case Suite::design: return "design";
  }
  return "all";
}

std::vector<int> criteria_of(Suite s) {
  std::vector<int> ids;
  for (const Entry& e : kEntries)
    if (s == Suite::all || e.suite == s) ids.push_back(e.id);
  return ids;
}

CriterionResult run_criterion(int id, const VerifyOptions& options) {
  for (const Entry& e : kEntries) {
    if (e.id != id) continue;
    CriterionResult r;
    r.id = id;
    r.name = e.name;
    const auto start = std::chrono::steady_clock::now();
    try {
      e.run(options, r);
    } catch (const std::exception& ex) {
      r.passed = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }
  throw std::invalid_argument("unknown criterion " + std::to_string(id));
}

std::vector<CriterionResult> run_suite(Suite suite, const VerifyOptions& options,
                                       const std::function<void(const CriterionResult&)>& report) {
  std::vector<CriterionResult> out;
  for (int id : criteria_of(suite)) {
    out.push_back(run_criterion(id, options));
    if (report) report(out.back());
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s %2d %s: measured %.6g %s %.6g (%.1f s) | %s",
                r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.measured, r.comparison.c_str(),
                r.tolerance, r.seconds, r.detail.c_str());
  return buf;
}

Json to_json(const std::vector<CriterionResult>& results) {
  Json arr = Json::array();
  for (const auto& r : results) {
    arr.push_back(Json{{"id", r.id},
                       {"name", r.name},
                       {"passed", r.passed},
                       {"measured", r.measured},
                       {"comparison", r.comparison},
                       {"tolerance", r.tolerance},
                       {"detail", r.detail},
                       {"seconds", r.seconds}});
  }
  return Json{{"results", arr}};
}

}  // namespace spadapt::verify
