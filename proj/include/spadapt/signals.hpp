#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spadapt/dyadic.hpp"

namespace spadapt {

using RealFunction = std::function<double(double)>;

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Local Hölder profile (t, M, eta). Interval extrema (t_lk, M_lk, eta_lk)
/// are evaluated on demand by dense sampling of the interval.
struct HolderProfile {
  RealFunction t;
  RealFunction M;
  RealFunction eta;

  static HolderProfile constant(double t, double M, double eta);
  /// t = t_left on [0, split), t_right on [split, 1].
  static HolderProfile piecewise(double t_left, double t_right, double split, double M, double eta);

  double t_min(const DyadicInterval& I) const;
  double M_max(const DyadicInterval& I) const;
  double eta_min(const DyadicInterval& I) const;

  /// Throws ValidationError unless inf t >= t1 > 0, t <= 1, and M, eta lie in
  /// [lower, upper] on a dense grid.
  void validate(double t1, double lower = 1e-12, double upper = 1e12) const;
};

enum class ModelKind { white_noise, regression };
enum class DesignKind { regular, uniform, jittered };

std::string to_string(ModelKind kind);
std::string to_string(DesignKind kind);
ModelKind model_kind_from_string(const std::string& s);
DesignKind design_kind_from_string(const std::string& s);

struct Dataset {
  ModelKind kind = ModelKind::regression;
  std::size_t n = 0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  /// Deepest coefficient level of a white-noise dataset (y has 2^(max_level+1) entries).
  int max_level = -1;
  std::vector<double> design;  // regression only, sorted, in (0, 1]
  std::vector<double> y;       // responses, or flat Y_lk for white noise
  RealFunction truth;          // may be empty
  std::string recipe;          // JSON text describing the truth

  double noise_precision() const;
  MultiscaleVector coefficients() const;
  void require_kind(ModelKind expected, const char* who) const;
};

double doppler_function(double x);

/// Doppler regression data: x_i = i / n, sigma = 1 by default.
Dataset doppler(std::size_t n = 2048, std::uint64_t seed = 0, double sigma = 1.0);

struct BrownianFlatOptions {
  std::uint64_t path_seed = 2021;
  double scale = 4.0;          // standard deviation of W(1)
  int resolution_level = 16;   // path is frozen on 2^resolution_level cells
};

/// Frozen Brownian path on [0, 1/2), continued as the constant f(1/2-) on [1/2, 1].
RealFunction brownian_flat_function(const BrownianFlatOptions& options = {});

Dataset brownian_flat(std::size_t n, std::uint64_t seed, ModelKind kind = ModelKind::white_noise,
                      const BrownianFlatOptions& options = {}, double sigma = 1.0);

/// Sum of cusps M(a) |x - a|^t(a).
struct CuspRecipe {
  std::vector<double> centers{0.5};
};

enum class SignPattern { alternating, random };

/// beta_lk = s_lk M(x_lk) 2^{-l (t(x_lk) + 1/2)} with x_lk the interval midpoint,
/// for 0 <= l <= max_level.
struct WaveletRecipe {
  int max_level = 18;
  SignPattern signs = SignPattern::alternating;
  std::uint64_t sign_seed = 0;
  double mean = 0.0;  // scaling coefficient
};

struct SynthFunction {
  RealFunction f;
  std::string recipe;
  /// Wavelet recipe only: the coefficient of node (l, k), 0 beyond max_level.
  std::function<double(NodeIndex)> coefficient;
  int synth_level = -1;

  /// Largest c_1 with |K_j f(x) - f(x)| >= c_1 2^{-j t(x)} for j0 <= j <= j_max,
  /// checked on the midpoints of the 2^grid_level grid directly from the
  /// construction's tail sums. Wavelet recipe only.
  double self_similarity_constant(const HolderProfile& profile, int j0, int j_max,
                                  int grid_level) const;
};

SynthFunction synth_holder(const HolderProfile& profile, const CuspRecipe& recipe);
SynthFunction synth_holder(const HolderProfile& profile, const WaveletRecipe& recipe);

struct SimulateOptions {
  DesignKind design = DesignKind::regular;
  std::string recipe = "{}";
};

/// Regression: Y_i = f0(x_i) + sigma eps_i. White noise: beta0 from the Haar
/// analysis of f0 sampled at the right endpoints of the 2n-cell grid, then
/// Y_lk = beta0_lk + sigma eps_lk / sqrt(n), max_level = log2 n.
Dataset simulate(const RealFunction& f0, ModelKind kind, std::size_t n, double sigma,
                 std::uint64_t seed, const SimulateOptions& options = {});

std::vector<double> make_design(DesignKind kind, std::size_t n, std::uint64_t seed);

/// White-noise view of a regular-design regression sample: Y = forward(y).
Dataset to_sequence(const Dataset& regression);

/// Truth evaluated at the right endpoints of an N-cell grid.
std::vector<double> sample_on_grid(const RealFunction& f, std::size_t cells);

struct CoefficientBoundReport {
  bool passed = true;
  double worst_ratio = 0.0;  // max |beta| / (2 M_lk 2^{-l(t(x)+1/2)})
  NodeIndex worst_node{};
  std::size_t checked = 0;
};

/// Checks |beta_{l,k_l(x)}| <= 2 M_lk 2^{-l(t(x)+1/2)} for all l >= log2(1/(2 eta_lk)),
/// up to `max_check_level` (default: all levels of beta).
CoefficientBoundReport check_coefficient_bound(const MultiscaleVector& beta,
                                               const HolderProfile& profile,
                                               int max_check_level = -1);

}  // namespace spadapt
