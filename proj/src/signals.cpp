#include "spadapt/signals.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "spadapt/rng.hpp"

namespace spadapt {

namespace {

constexpr int kExtremaSamples = 32;

template <class Reduce>
double reduce_over(const RealFunction& g, const DyadicInterval& I, double init, Reduce reduce) {
  double acc = init;
  for (int i = 1; i <= kExtremaSamples; ++i) {
    acc = reduce(acc, g(I.lo + I.length() * i / kExtremaSamples));
  }
  return acc;
}

// Generators accept M = 0 (the zero function) but otherwise enforce the
// profile bounds.
void check_generator_profile(const HolderProfile& profile) {
  if (!profile.t || !profile.M || !profile.eta) throw ValidationError("HolderProfile: unset component");
  profile.validate(1e-9, 0.0, 1e12);
  constexpr int grid = 256;
  for (int i = 0; i <= grid; ++i) {
    if (!(profile.eta(static_cast<double>(i) / grid) > 0.0)) {
      throw ValidationError("HolderProfile: eta must be positive");
    }
  }
}

}  // namespace

HolderProfile HolderProfile::constant(double t, double M, double eta) {
  return {[t](double) { return t; }, [M](double) { return M; }, [eta](double) { return eta; }};
}

HolderProfile HolderProfile::piecewise(double t_left, double t_right, double split, double M,
                                       double eta) {
  return {[=](double x) { return x < split ? t_left : t_right; },
          [M](double) { return M; },
          [eta](double) { return eta; }};
}

double HolderProfile::t_min(const DyadicInterval& I) const {
  return reduce_over(t, I, INFINITY, [](double a, double b) { return std::min(a, b); });
}

double HolderProfile::M_max(const DyadicInterval& I) const {
  return reduce_over(M, I, -INFINITY, [](double a, double b) { return std::max(a, b); });
}

double HolderProfile::eta_min(const DyadicInterval& I) const {
  return reduce_over(eta, I, INFINITY, [](double a, double b) { return std::min(a, b); });
}

void HolderProfile::validate(double t1, double lower, double upper) const {
  if (!(t1 > 0.0)) throw ValidationError("HolderProfile: t1 must be positive");
  constexpr int grid = 4096;
  for (int i = 0; i <= grid; ++i) {
    const double x = static_cast<double>(i) / grid;
    const double tv = t(x), mv = M(x), ev = eta(x);
    if (!(tv >= t1) || tv > 1.0) {
      throw ValidationError("HolderProfile: t(" + std::to_string(x) + ") = " +
                            std::to_string(tv) + " outside [t1, 1]");
    }
    if (!(mv >= lower && mv <= upper)) {
      throw ValidationError("HolderProfile: M not bounded away from 0 / above at x = " +
                            std::to_string(x));
    }
    if (!(ev >= lower && ev <= upper)) {
      throw ValidationError("HolderProfile: eta not bounded away from 0 / above at x = " +
                            std::to_string(x));
    }
  }
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::white_noise ? "white_noise" : "regression";
}

std::string to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::regular: return "regular";
    case DesignKind::uniform: return "uniform";
    case DesignKind::jittered: return "jittered";
  }
  return "regular";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "white_noise") return ModelKind::white_noise;
  if (s == "regression") return ModelKind::regression;
  throw ValidationError("unknown model kind '" + s + "'");
}

DesignKind design_kind_from_string(const std::string& s) {
  if (s == "regular") return DesignKind::regular;
  if (s == "uniform") return DesignKind::uniform;
  if (s == "jittered") return DesignKind::jittered;
  throw ValidationError("unknown design kind '" + s + "'");
}

double Dataset::noise_precision() const {
  return static_cast<double>(n) / (sigma * sigma);
}

MultiscaleVector Dataset::coefficients() const {
  require_kind(ModelKind::white_noise, "Dataset::coefficients");
  return MultiscaleVector(max_level, y);
}

void Dataset::require_kind(ModelKind expected, const char* who) const {
  if (kind != expected) {
    throw ValidationError(std::string(who) + ": expected a " + to_string(expected) +
                          " dataset, got " + to_string(kind));
  }
}

double doppler_function(double x) { return 3.0 * std::sin(4.0 / (x + 0.2)) + 1.5; }

Dataset doppler(std::size_t n, std::uint64_t seed, double sigma) {
  exact_log2(n);
  SimulateOptions opt;
  opt.recipe = R"({"name":"doppler"})";
  return simulate(doppler_function, ModelKind::regression, n, sigma, seed, opt);
}

RealFunction brownian_flat_function(const BrownianFlatOptions& options) {
  const std::size_t cells = std::size_t{1} << options.resolution_level;
  const std::size_t half = cells / 2;
  auto path = std::make_shared<std::vector<double>>(half);
  CounterRng rng(options.path_seed, 0xB1);
  const double step = options.scale * std::sqrt(1.0 / static_cast<double>(cells));
  double w = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    w += step * rng.normal();
    (*path)[i] = w;
  }
  const int level = options.resolution_level;
  return [path, level, half](double x) {
    const auto k = static_cast<std::size_t>(locate(level, x));
    return (*path)[std::min(k, half - 1)];
  };
}

Dataset brownian_flat(std::size_t n, std::uint64_t seed, ModelKind kind,
                      const BrownianFlatOptions& options, double sigma) {
  exact_log2(n);
  std::ostringstream recipe;
  recipe << R"({"name":"brownian_flat","path_seed":)" << options.path_seed
         << R"(,"scale":)" << options.scale << R"(,"resolution_level":)"
         << options.resolution_level << "}";
  SimulateOptions opt;
  opt.recipe = recipe.str();
  return simulate(brownian_flat_function(options), kind, n, sigma, seed, opt);
}

SynthFunction synth_holder(const HolderProfile& profile, const CuspRecipe& recipe) {
  check_generator_profile(profile);
  struct Cusp {
    double a, t, M;
  };
  std::vector<Cusp> cusps;
  for (double a : recipe.centers) cusps.push_back({a, profile.t(a), profile.M(a)});
  SynthFunction out;
  out.f = [cusps](double x) {
    double s = 0.0;
    for (const auto& c : cusps) s += c.M * std::pow(std::abs(x - c.a), c.t);
    return s;
  };
  std::ostringstream r;
  r << R"({"name":"cusp","centers":[)";
  for (std::size_t i = 0; i < recipe.centers.size(); ++i) r << (i ? "," : "") << recipe.centers[i];
  r << "]}";
  out.recipe = r.str();
  return out;
}

SynthFunction synth_holder(const HolderProfile& profile, const WaveletRecipe& recipe) {
  check_generator_profile(profile);
  if (recipe.max_level < 0 || recipe.max_level > 30) {
    throw ValidationError("WaveletRecipe: max_level must lie in [0, 30]");
  }
  const int top = recipe.max_level;
  auto coef = [profile, recipe, top](NodeIndex node) -> double {
    if (node.level < 0) return recipe.mean;
    if (node.level > top) return 0.0;
    const DyadicInterval I = interval_of(node);
    const double mid = 0.5 * (I.lo + I.hi);
    double sign = (node.k % 2 == 0) ? 1.0 : -1.0;
    if (recipe.signs == SignPattern::random) {
      sign = (splitmix64(recipe.sign_seed ^ (flat_index(node) * 0x9E3779B97F4A7C15ULL)) & 1U)
                 ? 1.0 : -1.0;
    }
    return sign * profile.M(mid) * std::exp2(-node.level * (profile.t(mid) + 0.5));
  };

  SynthFunction out;
  out.coefficient = coef;
  out.synth_level = top;
  out.f = [coef, top](double x) {
    double s = coef({-1, 0});
    for (int l = 0; l <= top; ++l) {
      const NodeIndex node{l, locate(l, x)};
      s += coef(node) * eval_haar(node, x);
    }
    return s;
  };
  std::ostringstream r;
  r << R"({"name":"wavelet","max_level":)" << top << R"(,"signs":")"
    << (recipe.signs == SignPattern::alternating ? "alternating" : "random")
    << R"(","sign_seed":)" << recipe.sign_seed << R"(,"mean":)" << recipe.mean << "}";
  out.recipe = r.str();
  return out;
}

double SynthFunction::self_similarity_constant(const HolderProfile& profile, int j0, int j_max,
                                               int grid_level) const {
  if (!coefficient) throw ValidationError("self_similarity_constant: wavelet recipe only");
  if (j0 < 0 || j_max < j0 || j_max > synth_level) {
    throw ValidationError("self_similarity_constant: need 0 <= j0 <= j_max <= synth level");
  }
  const std::size_t cells = std::size_t{1} << grid_level;
  double worst = INFINITY;
  std::vector<double> terms(static_cast<std::size_t>(synth_level) + 1);
  for (std::size_t i = 0; i < cells; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(cells);
    for (int l = 0; l <= synth_level; ++l) {
      const NodeIndex node{l, locate(l, x)};
      terms[l] = coefficient(node) * eval_haar(node, x);
    }
    double tail = 0.0;
    const double tx = profile.t(x);
    for (int l = synth_level; l >= j0; --l) {
      tail += terms[l];
      if (l <= j_max) worst = std::min(worst, std::abs(tail) * std::exp2(l * tx));
    }
  }
  return worst;
}

std::vector<double> make_design(DesignKind kind, std::size_t n, std::uint64_t seed) {
  std::vector<double> x(n);
  const double dn = static_cast<double>(n);
  switch (kind) {
    case DesignKind::regular:
      for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1) / dn;
      break;
    case DesignKind::uniform: {
      CounterRng rng(seed, 0xD0);
      for (auto& v : x) v = rng.uniform();
      std::sort(x.begin(), x.end());
      break;
    }
    case DesignKind::jittered: {
      CounterRng rng(seed, 0xD1);
      for (std::size_t i = 0; i < n; ++i) x[i] = (static_cast<double>(i) + rng.uniform()) / dn;
      break;
    }
  }
  return x;
}

std::vector<double> sample_on_grid(const RealFunction& f, std::size_t cells) {
  std::vector<double> out(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    out[i] = f(static_cast<double>(i + 1) / static_cast<double>(cells));
  }
  return out;
}

Dataset simulate(const RealFunction& f0, ModelKind kind, std::size_t n, double sigma,
                 std::uint64_t seed, const SimulateOptions& options) {
  if (n == 0) throw ShapeError("simulate: n must be positive");
  if (sigma < 0.0) throw ValidationError("simulate: sigma must be non-negative");
  Dataset d;
  d.kind = kind;
  d.n = n;
  d.sigma = sigma;
  d.seed = seed;
  d.truth = f0;
  d.recipe = options.recipe;
  CounterRng noise(seed, 0xE0);

  if (kind == ModelKind::regression) {
    d.design = make_design(options.design, n, seed);
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.y[i] = f0(d.design[i]) + sigma * noise.normal();
    return d;
  }

  d.max_level = exact_log2(n);
  const MultiscaleVector beta0 = forward(sample_on_grid(f0, 2 * n));
  const double scale = sigma / std::sqrt(static_cast<double>(n));
  d.y.assign(beta0.values().begin(), beta0.values().end());
  for (double& v : d.y) v += scale * noise.normal();
  return d;
}

Dataset to_sequence(const Dataset& regression) {
  regression.require_kind(ModelKind::regression, "to_sequence");
  const int levels = exact_log2(regression.n);
  for (std::size_t i = 0; i < regression.n; ++i) {
    const double expect = static_cast<double>(i + 1) / static_cast<double>(regression.n);
    if (std::abs(regression.design[i] - expect) > 1e-12) {
      throw ValidationError("to_sequence: design is not the regular grid i/n");
    }
  }
  Dataset d = regression;
  d.kind = ModelKind::white_noise;
  d.design.clear();
  d.max_level = levels - 1;
  const MultiscaleVector Y = forward(regression.y);
  d.y.assign(Y.values().begin(), Y.values().end());
  return d;
}

CoefficientBoundReport check_coefficient_bound(const MultiscaleVector& beta,
                                               const HolderProfile& profile,
                                               int max_check_level) {
  CoefficientBoundReport rep;
  const int top = max_check_level < 0 ? beta.max_level()
                                      : std::min(max_check_level, beta.max_level());
  for (int l = 0; l <= top; ++l) {
    const long count = 1L << l;
    for (long k = 0; k < count; ++k) {
      const NodeIndex node{l, k};
      const DyadicInterval I = interval_of(node);
      const double eta = profile.eta_min(I);
      if (l < std::log2(1.0 / (2.0 * eta))) continue;
      const double M = profile.M_max(I);
      const double b = std::abs(beta[node]);
      for (int s = 0; s < 4; ++s) {
        const double x = I.lo + I.length() * (s + 0.5) / 4.0;
        const double bound = 2.0 * M * std::exp2(-l * (profile.t(x) + 0.5));
        const double ratio = b / bound;
        ++rep.checked;
        if (ratio > rep.worst_ratio) {
          rep.worst_ratio = ratio;
          rep.worst_node = node;
        }
      }
    }
  }
  rep.passed = rep.worst_ratio <= 1.0 + 1e-12;
  return rep;
}

}  // namespace spadapt
