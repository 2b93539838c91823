#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <set>

#include "spadapt/bcart.hpp"
#include "spadapt/gp.hpp"
#include "spadapt/io.hpp"
#include "spadapt/metrics.hpp"
#include "spadapt/partition.hpp"
#include "spadapt/regress.hpp"
#include "spadapt/rng.hpp"
#include "spadapt/spikeslab.hpp"

namespace spadapt::tools {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kEngines{"bcart", "spikeslab", "regress", "partition", "gp"};

// Typed, range-checked access to one table of the config document.
class Fields {
 public:
  Fields(const Json& doc, std::string prefix, const std::set<std::string>& allowed)
      : doc_(doc.is_null() ? empty_ : doc), prefix_(std::move(prefix)) {
    if (!doc_.is_object()) fail("", "expected a table");
    for (const auto& [key, _] : doc_.items()) {
      if (!allowed.count(key)) fail(key, "unknown field");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::string where = prefix_;
    if (!key.empty()) where += (where.empty() ? "" : ".") + key;
    throw ConfigError(where + ": " + msg);
  }

  bool has(const std::string& key) const { return doc_.contains(key); }
  const Json& at(const std::string& key) const { return doc_.at(key); }

  double number(const std::string& key, double fallback, double lo = -INFINITY,
                double hi = INFINITY) const {
    if (!has(key)) return fallback;
    const Json& v = doc_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double x = v.get<double>();
    if (!(x >= lo && x <= hi)) fail(key, "value out of range");
    return x;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t lo) const {
    if (!has(key)) return fallback;
    const Json& v = doc_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo) fail(key, "must be >= " + std::to_string(lo));
    return x;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!doc_.at(key).is_boolean()) fail(key, "expected true or false");
    return doc_.at(key).get<bool>();
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& options) const {
    if (!has(key)) return fallback;
    const Json& v = doc_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    const auto s = v.get<std::string>();
    if (std::find(options.begin(), options.end(), s) == options.end()) {
      std::string list;
      for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
      fail(key, "'" + s + "' is not one of " + list);
    }
    return s;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!doc_.at(key).is_string()) fail(key, "expected a string");
    return doc_.at(key).get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const Json& v = doc_.at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  static inline const Json empty_ = Json::object();
  const Json& doc_;
  std::string prefix_;
};

const std::set<std::string> kTopKeys{"name", "seed", "replicates", "out", "truth", "model",
                                     "fit", "bands", "bcart", "spikeslab", "regress",
                                     "partition", "gp"};
const std::set<std::string> kTruthKeys{"kind", "t", "t_left", "t_right", "split", "M", "eta",
                                       "scale", "path_seed", "resolution_level", "centers",
                                       "level", "signs", "sign_seed", "mean", "value"};

Fields section(const Json& doc, const std::string& name, const std::set<std::string>& keys) {
  static const Json none;
  return Fields(doc.contains(name) ? doc.at(name) : none, name, keys);
}

Fields bcart_fields(const Json& doc) { return section(doc, "bcart", {"gamma", "decay", "max_level"}); }
Fields spikeslab_fields(const Json& doc) {
  return section(doc, "spikeslab", {"weights", "tau", "slab", "slab_scale", "slab_radius", "estimator"});
}
Fields regress_fields(const Json& doc) {
  return section(doc, "regress", {"gamma", "decay", "g", "iterations", "burn_in", "design_level", "c_star"});
}
Fields partition_fields(const Json& doc) {
  return section(doc, "partition", {"B", "size", "C", "slab", "slab_scale", "slab_radius"});
}
Fields gp_fields(const Json& doc) { return section(doc, "gp", {"variant", "estimator"}); }

GaltonWatsonPrior tree_prior(const Fields& f, int max_level) {
  GaltonWatsonPrior p;
  p.gamma = f.number("gamma", 4.0);
  if (!(p.gamma > 2.0)) f.fail("gamma", "must exceed 2");
  p.decay = f.choice("decay", "linear", {"linear", "quadratic"}) == "linear" ? SplitDecay::linear
                                                                             : SplitDecay::quadratic;
  p.max_level = max_level;
  return p;
}

Slab slab_from(const Fields& f, const Slab& fallback) {
  Slab s = fallback;
  s.kind = f.choice("slab", fallback.kind == SlabKind::gaussian ? "gaussian" : "uniform",
                    {"gaussian", "uniform"}) == "gaussian"
               ? SlabKind::gaussian
               : SlabKind::uniform;
  s.scale = f.number("slab_scale", fallback.scale, 1e-12);
  s.radius = f.number("slab_radius", fallback.radius, 1e-12);
  return s;
}

void validate_engine_params(const Json& doc) {
  // Constructing each view checks unknown keys; reading checks types.
  tree_prior(bcart_fields(doc), -1);
  bcart_fields(doc).integer("max_level", -1, -1);
  const Fields ss = spikeslab_fields(doc);
  ss.choice("weights", "relaxed", {"relaxed", "strict"});
  ss.number("tau", 0.75, 0.0);
  ss.choice("estimator", "mean", {"mean", "mpm"});
  slab_from(ss, Slab{});
  const Fields rg = regress_fields(doc);
  tree_prior(rg, -1);
  rg.number("g", 0.0, 0.0);
  rg.integer("iterations", 20000, 1);
  rg.number("burn_in", 0.2, 0.0, 1.0);
  rg.integer("design_level", -1, -1);
  rg.number("c_star", 1.0, 1e-12);
  const Fields pt = partition_fields(doc);
  pt.number("B", 10.0, 0.0);
  pt.choice("size", "length", {"length", "units"});
  pt.number("C", 2.0, 1e-12);
  slab_from(pt, PartitionPrior{}.slab);
  const Fields gp = gp_fields(doc);
  gp.choice("variant", "sieve", {"sieve", "scale", "rate"});
  gp.choice("estimator", "mean", {"mean", "eb"});
}

Dataset white_noise_view(const Dataset& data, const std::string& engine) {
  if (data.kind == ModelKind::white_noise) return data;
  try {
    return to_sequence(data);
  } catch (const ValidationError&) {
    throw ConfigError(engine + ": needs white-noise data or a regular regression design");
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

struct Metrics {
  double sup_loss = 0.0;
  double sup_error = 0.0;
  double l2 = 0.0;
  double l2_smooth_half = 0.0;
};

struct BandMetrics {
  double contained = 0.0;
  double nonadaptive_contained = 0.0;
  double radius_left = 0.0;
  double radius_right = 0.0;
  double excluded_fraction = 0.0;
};

struct Replicate {
  std::vector<Metrics> metrics;
  BandMetrics band;
  std::vector<EngineOutput> outputs;  // replicate 0 only
  std::optional<BandOutput> band_output;
  std::optional<Dataset> data;
};

}  // namespace

ExperimentConfig load_config(const Json& doc) {
  const Fields top(doc, "", kTopKeys);
  ExperimentConfig cfg;
  cfg.raw = doc;
  cfg.name = top.text("name", "experiment");
  cfg.seed = static_cast<std::uint64_t>(top.integer("seed", 0, 0));
  cfg.replicates = static_cast<std::size_t>(top.integer("replicates", 1, 1));
  cfg.out = top.text("out", "");

  const Fields truth = section(doc, "truth", kTruthKeys);
  truth.choice("kind", "doppler", {"doppler", "brownian_flat", "cusp", "synth", "spatial_beta", "constant"});

  const Fields model = section(doc, "model", {"kind", "n", "sigma", "design"});
  cfg.model = model_kind_from_string(model.choice("kind", "regression", {"regression", "white_noise"}));
  cfg.design = design_kind_from_string(model.choice("design", "regular", {"regular", "uniform", "jittered"}));
  cfg.sigma = model.number("sigma", 1.0, 0.0);
  if (model.has("n")) {
    const Json& n = model.at("n");
    const Json list = n.is_array() ? n : Json::array({n});
    cfg.n.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = n.is_array() ? "n[" + std::to_string(i) + "]" : "n";
      if (!list[i].is_number_integer() || list[i].get<std::int64_t>() < 2) model.fail(where, "expected an integer >= 2");
      const auto v = static_cast<std::size_t>(list[i].get<std::int64_t>());
      if ((v & (v - 1)) != 0 && (cfg.model == ModelKind::white_noise || cfg.design == DesignKind::regular)) {
        model.fail(where, "must be a power of two for this model and design");
      }
      cfg.n.push_back(v);
    }
    if (cfg.n.empty()) model.fail("n", "must not be empty");
  }

  const Fields fit = section(doc, "fit", {"engines"});
  if (fit.has("engines")) {
    const Json& e = fit.at("engines");
    if (!e.is_array()) fit.fail("engines", "expected an array of engine names");
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string where = "engines[" + std::to_string(i) + "]";
      if (!e[i].is_string() || std::find(kEngines.begin(), kEngines.end(), e[i].get<std::string>()) == kEngines.end()) {
        fit.fail(where, "expected one of bcart, spikeslab, regress, partition, gp");
      }
      const std::string name = e[i].get<std::string>();
      if (cfg.model == ModelKind::white_noise && name != "bcart" && name != "spikeslab") {
        fit.fail(where, name + " needs regression data");
      }
      if ((name == "gp" || name == "bcart" || name == "spikeslab") && cfg.model == ModelKind::regression &&
          cfg.design != DesignKind::regular) {
        fit.fail(where, name + " needs a regular design");
      }
      cfg.engines.push_back(name);
    }
  }

  const Fields bands = section(doc, "bands", {"enabled", "v_n", "engine"});
  cfg.bands = bands.boolean("enabled", bands.has("v_n") || bands.has("engine"));
  cfg.v_n = bands.number("v_n", 2.0, 1e-12);
  cfg.band_engine = bands.choice("engine", "bcart", {"bcart", "spikeslab"});
  if (cfg.bands && cfg.model == ModelKind::regression && cfg.design != DesignKind::regular) {
    bands.fail("enabled", "bands need white-noise data or a regular design");
  }
  validate_engine_params(doc);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  const Json doc = parse_toml_file(path);
  try {
    return load_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.raw.dump())));
  return buf;
}

TruthSpec make_truth(const ExperimentConfig& cfg) {
  const Fields f = section(cfg.raw, "truth", kTruthKeys);
  const std::string kind = f.choice("kind", "doppler", {"doppler", "brownian_flat", "cusp", "synth", "spatial_beta", "constant"});
  const double M = f.number("M", 1.0, 0.0);
  const double eta = f.number("eta", 0.5, 1e-12, 1.0);
  const bool piecewise = f.has("t_left") || f.has("t_right") || kind == "spatial_beta" || kind == "brownian_flat";
  HolderProfile profile;
  if (piecewise) {
    const double t_left = f.number("t_left", kind == "spatial_beta" ? 0.4 : 0.5, 1e-6, 1.0);
    const double t_right = f.number("t_right", 1.0, 1e-6, 1.0);
    profile = HolderProfile::piecewise(t_left, t_right, f.number("split", 0.5, 0.0, 1.0), M, eta);
  } else {
    profile = HolderProfile::constant(f.number("t", 1.0, 1e-6, 1.0), M, eta);
  }

  TruthSpec spec;
  spec.profile = profile;
  if (kind == "doppler") {
    spec.f = doppler_function;
    spec.recipe = R"({"name":"doppler"})";
  } else if (kind == "brownian_flat") {
    BrownianFlatOptions o;
    o.scale = f.number("scale", o.scale, 0.0);
    o.path_seed = static_cast<std::uint64_t>(f.integer("path_seed", static_cast<std::int64_t>(o.path_seed), 0));
    o.resolution_level = static_cast<int>(f.integer("resolution_level", o.resolution_level, 1));
    spec.f = brownian_flat_function(o);
    spec.recipe = Json{{"name", "brownian_flat"}, {"scale", o.scale}, {"path_seed", o.path_seed}}.dump();
  } else if (kind == "cusp") {
    CuspRecipe r;
    const auto centers = f.numbers("centers", r.centers);
    r.centers = centers;
    const SynthFunction s = synth_holder(profile, r);
    spec.f = s.f;
    spec.recipe = s.recipe;
  } else if (kind == "constant") {
    const double v = f.number("value", 0.0);
    spec.f = [v](double) { return v; };
    spec.recipe = Json{{"name", "constant"}, {"value", v}}.dump();
  } else {
    WaveletRecipe r;
    r.max_level = static_cast<int>(f.integer("level", r.max_level, 0));
    r.signs = f.choice("signs", "alternating", {"alternating", "random"}) == "alternating"
                  ? SignPattern::alternating
                  : SignPattern::random;
    r.sign_seed = static_cast<std::uint64_t>(f.integer("sign_seed", 0, 0));
    r.mean = f.number("mean", 0.0);
    const SynthFunction s = synth_holder(profile, r);
    spec.f = s.f;
    spec.recipe = s.recipe;
  }
  return spec;
}

Dataset simulate_replicate(const ExperimentConfig& cfg, const TruthSpec& truth, std::size_t n,
                           std::size_t replicate) {
  SimulateOptions opt;
  opt.design = cfg.design;
  opt.recipe = truth.recipe;
  const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, n), replicate);
  return simulate(truth.f, cfg.model, n, cfg.sigma, seed, opt);
}

double evaluate_step(const std::vector<double>& values, double x) {
  const auto N = static_cast<long>(values.size());
  const long c = std::clamp(static_cast<long>(std::ceil(x * static_cast<double>(N))) - 1, 0L, N - 1);
  return values[static_cast<std::size_t>(c)];
}

EngineOutput run_engine(const std::string& engine, const Dataset& data, const Json& params,
                        std::uint64_t seed) {
  EngineOutput out;
  out.engine = engine;
  if (engine == "bcart") {
    const Fields f = bcart_fields(params);
    const Dataset wn = white_noise_view(data, engine);
    const BcartFit fit = fit_exact(wn, tree_prior(f, static_cast<int>(f.integer("max_level", -1, -1))));
    out.estimate = fit.point_estimate;
    out.summary = summary_json(fit);
    out.summary["median_deepest_level"] = {{"left", median_deepest_level(fit, {1, 0})},
                                          {"right", median_deepest_level(fit, {1, 1})}};
  } else if (engine == "spikeslab") {
    const Fields f = spikeslab_fields(params);
    const Dataset wn = white_noise_view(data, engine);
    const double n = wn.noise_precision();
    SpikeSlabPrior prior = f.choice("weights", "relaxed", {"relaxed", "strict"}) == "relaxed"
                               ? SpikeSlabPrior::relaxed(n)
                               : SpikeSlabPrior::strict(n, f.number("tau", 0.75, 0.0));
    prior.slab = slab_from(f, Slab{});
    const SpikeSlabFit fit = fit_spikeslab(wn, prior);
    const bool mpm = f.choice("estimator", "mean", {"mean", "mpm"}) == "mpm";
    out.estimate = mpm ? fit.mpm_estimate : fit.point_estimate;
    out.summary = summary_json(fit);
    out.summary["estimator"] = mpm ? "mpm" : "mean";
  } else if (engine == "regress") {
    if (data.kind != ModelKind::regression) throw ConfigError("regress: needs regression data");
    const Fields f = regress_fields(params);
    MhOptions opts;
    opts.iterations = static_cast<std::size_t>(f.integer("iterations", 20000, 1));
    opts.burn_in_fraction = f.number("burn_in", 0.2, 0.0, 1.0);
    int level = static_cast<int>(f.integer("design_level", -1, -1));
    if (level < 0) level = default_design_level(data.n, f.number("c_star", 1.0, 1e-12));
    const GPriorSpec g{f.number("g", 0.0, 0.0)};
    const MhFit fit = fit_mh(data, tree_prior(f, -1), g, seed, opts, level);
    out.estimate = fit.point_estimate;
    out.summary = summary_json(fit);
    out.summary["acceptance_rate"] = fit.acceptance_rate;
    out.summary["burn_in"] = fit.burn_in;
    out.summary["warnings"] = fit.warnings;
  } else if (engine == "partition") {
    if (data.kind != ModelKind::regression) throw ConfigError("partition: needs regression data");
    const Fields f = partition_fields(params);
    PartitionPrior prior;
    prior.B = f.number("B", 10.0, 0.0);
    prior.size = f.choice("size", "length", {"length", "units"}) == "length" ? SizeMeasure::length
                                                                              : SizeMeasure::units;
    prior.slab = slab_from(f, prior.slab);
    const KnotGrid grid = order_statistic_grid(data.design, f.number("C", 2.0, 1e-12));
    const PartitionFit fit = fit_dp(data, grid, prior);
    out.estimate = fit.on_grid(data.n);
    std::vector<double> breaks;
    for (std::size_t b : fit.map_breaks) breaks.push_back(grid.z[b]);
    out.summary = Json{{"engine", "partition"},
                       {"log_evidence", fit.log_normalizer},
                       {"grid_cells", grid.cells()},
                       {"spacing", {{"c_lower", grid.c_lower}, {"c_upper", grid.c_upper}}},
                       {"expected_segments", fit.expected_segments},
                       {"map_breaks", breaks}};
  } else if (engine == "gp") {
    const Fields f = gp_fields(params);
    const GpVariant variant = gp_variant_from_string(f.choice("variant", "sieve", {"sieve", "scale", "rate"}));
    const GpFit fit = fit_conjugate(data, GpPriorSpec::defaults(variant, data.n));
    const bool eb = f.choice("estimator", "mean", {"mean", "eb"}) == "eb";
    out.estimate = eb ? fit.eb_estimate : fit.point_estimate;
    out.summary = summary_json(fit);
    out.summary["variant"] = to_string(variant);
    out.summary["hyper_values"] = fit.spec.hyper_values;
    out.summary["hyper_posterior"] = fit.hyper_posterior;
    out.summary["hyper_median"] = fit.hyper_median;
    out.summary["eb_value"] = fit.spec.hyper_values[fit.eb_index];
  } else {
    throw ConfigError("unknown engine '" + engine + "'");
  }
  return out;
}

BandOutput run_bands(const ExperimentConfig& cfg, const Dataset& data) {
  const Dataset wn = white_noise_view(data, "bands");
  BandOutput out;
  MedianTree tree;
  if (cfg.band_engine == "bcart") {
    const Fields f = bcart_fields(cfg.raw);
    tree = median_tree(fit_exact(wn, tree_prior(f, static_cast<int>(f.integer("max_level", -1, -1)))));
  } else {
    const Fields f = spikeslab_fields(cfg.raw);
    const double n = wn.noise_precision();
    SpikeSlabPrior prior = f.choice("weights", "relaxed", {"relaxed", "strict"}) == "relaxed"
                               ? SpikeSlabPrior::relaxed(n)
                               : SpikeSlabPrior::strict(n, f.number("tau", 0.75, 0.0));
    prior.slab = slab_from(f, Slab{});
    tree = median_tree(fit_spikeslab(wn, prior));
  }
  std::vector<double> center = median_estimator(tree, wn);
  std::vector<double> x = grid_points(center.size());
  std::vector<double> radius = local_radius(tree, wn.noise_precision(), cfg.v_n, x);
  const double sup_radius = radius.empty() ? 0.0 : *std::max_element(radius.begin(), radius.end());
  out.nonadaptive_radius.assign(radius.size(), sup_radius);
  out.band = make_band(std::move(x), std::move(center), std::move(radius));
  if (data.truth) out.containment = contains(out.band, data.truth);
  out.summary = Json{{"engine", cfg.band_engine},
                     {"v_n", cfg.v_n},
                     {"median_tree_nodes", tree.nodes().size()},
                     {"repaired", tree.repaired},
                     {"contained", out.containment.contained},
                     {"worst_ratio", out.containment.worst},
                     {"excluded_fraction", out.containment.excluded_fraction},
                     {"nonadaptive_radius", sup_radius}};
  return out;
}

std::vector<fs::path> run_experiment(const ExperimentConfig& cfg, const fs::path& out,
                                     const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const TruthSpec truth = make_truth(cfg);
  const std::string hash = config_hash(cfg);
  std::vector<fs::path> files;
  const std::size_t E = cfg.engines.size();

  // per engine: rows of (n, replicate, metrics)
  std::vector<std::vector<std::pair<std::size_t, Metrics>>> rows(E);
  std::vector<std::pair<std::size_t, BandMetrics>> band_rows;

  for (std::size_t n : cfg.n) {
    const auto reps = run_replicates<Replicate>(
        cfg.replicates,
        [&](std::size_t r) {
          Replicate rep;
          const Dataset data = simulate_replicate(cfg, truth, n, r);
          for (std::size_t e = 0; e < E; ++e) {
            const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, n), 1000003 * (e + 1) + r);
            EngineOutput o = run_engine(cfg.engines[e], data, cfg.raw, seed);
            Metrics m;
            m.sup_loss = sup_loss(o.estimate, truth.f, truth.profile, static_cast<double>(n));
            m.sup_error = sup_error(o.estimate, truth.f);
            m.l2 = l2_loss(o.estimate, truth.f);
            m.l2_smooth_half = l2_loss(o.estimate, truth.f, 0.5, 1.0);
            rep.metrics.push_back(m);
            if (r == 0) rep.outputs.push_back(std::move(o));
          }
          if (cfg.bands) {
            BandOutput b = run_bands(cfg, data);
            rep.band.contained = b.containment.contained;
            rep.band.nonadaptive_contained =
                contains(make_band(b.band.x, b.band.center, b.nonadaptive_radius), truth.f).contained;
            double left = 0, right = 0;
            std::size_t nl = 0, nr = 0;
            for (std::size_t i = 0; i < b.band.x.size(); ++i) {
              if (b.band.x[i] <= 0.5) {
                left += b.band.radius[i];
                ++nl;
              } else {
                right += b.band.radius[i];
                ++nr;
              }
            }
            rep.band.radius_left = nl ? left / double(nl) : 0.0;
            rep.band.radius_right = nr ? right / double(nr) : 0.0;
            rep.band.excluded_fraction = b.containment.excluded_fraction;
            if (r == 0) rep.band_output = std::move(b);
          }
          if (r == 0) rep.data = data;
          return rep;
        },
        options.exec);

    for (std::size_t r = 0; r < reps.size(); ++r) {
      for (std::size_t e = 0; e < E; ++e) rows[e].push_back({r, reps[r].metrics[e]});
      if (cfg.bands) band_rows.push_back({r, reps[r].band});
    }
    if (!options.artifacts) continue;

    const Replicate& first = reps.front();
    const std::string tag = "n" + std::to_string(n);
    Json sidecar = dataset_sidecar(*first.data);
    sidecar["config_hash"] = hash;
    write_dataset(out, "data_" + tag, *first.data);
    write_json(out / ("data_" + tag + ".json"), sidecar);
    files.push_back(out / ("data_" + tag + ".csv"));
    files.push_back(out / ("data_" + tag + ".json"));

    if (E > 0) {
      std::size_t cells = n;
      for (const auto& o : first.outputs) cells = std::max(cells, o.estimate.size());
      const std::vector<double> x = grid_points(cells);
      std::vector<Column> cols{{"x", x}, {"truth", sample_on_grid(truth.f, cells)}};
      for (const auto& o : first.outputs) {
        Column c{o.engine, {}};
        for (double xi : x) c.values.push_back(evaluate_step(o.estimate, xi));
        cols.push_back(std::move(c));
        Json s = o.summary;
        s["config_hash"] = hash;
        s["n"] = n;
        write_json(out / ("summary_" + o.engine + "_" + tag + ".json"), s);
        files.push_back(out / ("summary_" + o.engine + "_" + tag + ".json"));
      }
      write_csv(out / ("fit_" + tag + ".csv"), cols);
      files.push_back(out / ("fit_" + tag + ".csv"));
    }
    if (cfg.bands) {
      const BandOutput& b = *first.band_output;
      std::vector<double> lower, upper, truth_on;
      for (std::size_t i = 0; i < b.band.x.size(); ++i) {
        lower.push_back(b.band.center[i] - b.band.radius[i]);
        upper.push_back(b.band.center[i] + b.band.radius[i]);
        truth_on.push_back(truth.f(b.band.x[i]));
      }
      write_csv(out / ("bands_" + tag + ".csv"),
                {{"x", b.band.x}, {"truth", truth_on}, {"center", b.band.center},
                 {"radius", b.band.radius}, {"lower", lower}, {"upper", upper},
                 {"nonadaptive_radius", b.nonadaptive_radius}});
      Json s = b.summary;
      s["config_hash"] = hash;
      write_json(out / ("bands_" + tag + ".json"), s);
      files.push_back(out / ("bands_" + tag + ".csv"));
      files.push_back(out / ("bands_" + tag + ".json"));
    }
  }

  Json slopes = Json::object();
  for (std::size_t e = 0; e < E; ++e) {
    Column cn{"n", {}}, cr{"replicate", {}}, c1{"sup_loss", {}}, c2{"sup_error", {}},
        c3{"l2", {}}, c4{"l2_smooth_half", {}};
    std::map<std::size_t, std::vector<Metrics>> by_n;
    std::size_t i = 0;
    for (const auto& [r, m] : rows[e]) {
      const std::size_t n = cfg.n[i++ / cfg.replicates];
      cn.values.push_back(double(n));
      cr.values.push_back(double(r));
      c1.values.push_back(m.sup_loss);
      c2.values.push_back(m.sup_error);
      c3.values.push_back(m.l2);
      c4.values.push_back(m.l2_smooth_half);
      by_n[n].push_back(m);
    }
    const std::string engine = cfg.engines[e];
    write_csv(out / ("metrics_" + engine + ".csv"), {cn, cr, c1, c2, c3, c4});
    files.push_back(out / ("metrics_" + engine + ".csv"));

    Column rn{"n", {}}, m1{"median_sup_loss", {}}, m2{"median_sup_error", {}}, m3{"median_l2", {}},
        m4{"median_l2_smooth_half", {}};
    for (const auto& [n, ms] : by_n) {
      std::vector<double> a, b, c, d;
      for (const auto& m : ms) {
        a.push_back(m.sup_loss);
        b.push_back(m.sup_error);
        c.push_back(m.l2);
        d.push_back(m.l2_smooth_half);
      }
      rn.values.push_back(double(n));
      m1.values.push_back(median(a));
      m2.values.push_back(median(b));
      m3.values.push_back(median(c));
      m4.values.push_back(median(d));
    }
    write_csv(out / ("rates_" + engine + ".csv"), {rn, m1, m2, m3, m4});
    files.push_back(out / ("rates_" + engine + ".csv"));
    if (rn.values.size() >= 2) {
      slopes[engine] = Json{{"sup_error", loglog_slope(rn.values, m2.values).slope},
                            {"l2", loglog_slope(rn.values, m3.values).slope},
                            {"l2_smooth_half", loglog_slope(rn.values, m4.values).slope},
                            {"sup_loss", loglog_slope(rn.values, m1.values).slope}};
    }
  }
  if (!slopes.empty()) {
    slopes["config_hash"] = hash;
    write_json(out / "slopes.json", slopes);
    files.push_back(out / "slopes.json");
  }
  if (cfg.bands) {
    Column cn{"n", {}}, cr{"replicate", {}}, a{"contained", {}}, b{"nonadaptive_contained", {}},
        c{"mean_radius_left", {}}, d{"mean_radius_right", {}}, x{"excluded_fraction", {}};
    std::size_t i = 0;
    for (const auto& [r, m] : band_rows) {
      cn.values.push_back(double(cfg.n[i++ / cfg.replicates]));
      cr.values.push_back(double(r));
      a.values.push_back(m.contained);
      b.values.push_back(m.nonadaptive_contained);
      c.values.push_back(m.radius_left);
      d.values.push_back(m.radius_right);
      x.values.push_back(m.excluded_fraction);
    }
    write_csv(out / "band_coverage.csv", {cn, cr, a, b, c, d, x});
    files.push_back(out / "band_coverage.csv");
  }

  Json manifest{{"name", cfg.name},
                {"config_hash", hash},
                {"config", cfg.raw},
                {"created", timestamp()},
                {"threads", thread_count()},
                {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  Json list = Json::array();
  for (const auto& f : files) list.push_back(f.filename().string());
  manifest["files"] = list;
  write_json(out / "manifest.json", manifest);
  files.push_back(out / "manifest.json");
  return files;
}

}  // namespace spadapt::tools
