#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "experiment.hpp"
#include "spadapt/io.hpp"
#include "spadapt/parallel.hpp"
#include "spadapt/rng.hpp"
#include "verify/acceptance.hpp"

namespace fs = std::filesystem;
using namespace spadapt;
using namespace spadapt::tools;

namespace {

struct Common {
  std::string config;
  std::int64_t seed = -1;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
  auto* opt = app->add_option("--config", c.config, "experiment config (TOML)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "override the config seed")->check(CLI::NonNegativeNumber);
  app->add_option("--out", c.out, "output directory (env SPATIAL_ADAPT_OUT)");
  app->add_option("--threads", c.threads, "worker threads (env SPATIAL_ADAPT_THREADS)")
      ->check(CLI::NonNegativeNumber);
}

void apply_threads(const Common& c) {
  const int t = c.threads > 0 ? c.threads : threads_from_env();
  set_thread_count(t);
}

ExperimentConfig load(const Common& c) {
  Json doc = c.config.empty() ? Json::object() : parse_toml_file(c.config);
  if (c.seed >= 0) doc["seed"] = c.seed;
  try {
    return load_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError((c.config.empty() ? std::string("defaults") : c.config) + ": " + e.what());
  }
}

fs::path out_dir(const Common& c, const ExperimentConfig& cfg) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("SPATIAL_ADAPT_OUT"); env && *env) return fs::path(env) / cfg.name;
  if (!cfg.out.empty()) return cfg.out;
  return fs::path("out") / cfg.name;
}

void list_files(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatially adaptive Bayesian estimators: simulate, fit, bands, verify, sweep, run"};
  app.require_subcommand(1);

  Common sim_c, fit_c, band_c, ver_c, sweep_c, run_c;

  auto* sim = app.add_subcommand("simulate", "write replicate-0 datasets for every n in the config");
  add_common(sim, sim_c, true);
  std::size_t sim_replicate = 0;
  sim->add_option("--replicate", sim_replicate, "replicate index");

  auto* fit = app.add_subcommand("fit", "fit one engine to a dataset");
  add_common(fit, fit_c, false);
  std::string engine, data_path;
  fit->add_option("engine", engine, "bcart | spikeslab | regress | partition | gp")
      ->required()
      ->check(CLI::IsMember({"bcart", "spikeslab", "regress", "partition", "gp"}));
  fit->add_option("--data", data_path, "dataset CSV written by `simulate` (default: simulate from the config)")
      ->check(CLI::ExistingFile);

  auto* bands = app.add_subcommand("bands", "median-tree credible band and its containment of the truth");
  add_common(bands, band_c, true);

  auto* ver = app.add_subcommand("verify", "run an acceptance suite");
  add_common(ver, ver_c, false);
  std::string suite_name;
  ver->add_option("suite", suite_name, "oracle | rates | coverage | design | all")
      ->required()
      ->check(CLI::IsMember({"oracle", "rates", "coverage", "design", "all"}));

  auto* sweep = app.add_subcommand("sweep", "replicate metrics and slope tables only");
  add_common(sweep, sweep_c, true);

  auto* run = app.add_subcommand("run", "full experiment: datasets, fits, bands, metrics");
  add_common(run, run_c, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      apply_threads(sim_c);
      const ExperimentConfig cfg = load(sim_c);
      const TruthSpec truth = make_truth(cfg);
      const fs::path out = out_dir(sim_c, cfg);
      for (std::size_t n : cfg.n) {
        const Dataset d = simulate_replicate(cfg, truth, n, sim_replicate);
        const std::string stem = "data_n" + std::to_string(n);
        write_dataset(out, stem, d);
        Json sidecar = dataset_sidecar(d);
        sidecar["config_hash"] = config_hash(cfg);
        sidecar["replicate"] = sim_replicate;
        write_json(out / (stem + ".json"), sidecar);
        std::cout << (out / (stem + ".csv")).string() << "\n";
      }
    } else if (fit->parsed()) {
      apply_threads(fit_c);
      const ExperimentConfig cfg = load(fit_c);
      const fs::path out = out_dir(fit_c, cfg);
      Dataset d;
      if (!data_path.empty()) {
        d = read_dataset(data_path);
      } else {
        d = simulate_replicate(cfg, make_truth(cfg), cfg.n.front(), 0);
      }
      const EngineOutput o = run_engine(engine, d, cfg.raw, derive_seed(cfg.seed, 7));
      const std::vector<double> x = grid_points(o.estimate.size());
      write_csv(out / ("fit_" + engine + ".csv"), {{"x", x}, {"estimate", o.estimate}});
      Json s = o.summary;
      s["config_hash"] = config_hash(cfg);
      write_json(out / ("summary_" + engine + ".json"), s);
      list_files({out / ("fit_" + engine + ".csv"), out / ("summary_" + engine + ".json")});
    } else if (bands->parsed()) {
      apply_threads(band_c);
      ExperimentConfig cfg = load(band_c);
      cfg.bands = true;
      const fs::path out = out_dir(band_c, cfg);
      const Dataset d = simulate_replicate(cfg, make_truth(cfg), cfg.n.front(), 0);
      const BandOutput b = run_bands(cfg, d);
      write_csv(out / "bands.csv", {{"x", b.band.x},
                                    {"center", b.band.center},
                                    {"radius", b.band.radius},
                                    {"nonadaptive_radius", b.nonadaptive_radius}});
      Json s = b.summary;
      s["config_hash"] = config_hash(cfg);
      write_json(out / "bands.json", s);
      std::cout << s.dump(2) << "\n";
    } else if (ver->parsed()) {
      apply_threads(ver_c);
      verify::VerifyOptions opts;
      if (ver_c.seed >= 0) opts.seed = static_cast<std::uint64_t>(ver_c.seed);
      const auto suite = verify::suite_from_string(suite_name);
      const auto results = verify::run_suite(suite, opts, [](const verify::CriterionResult& r) {
        std::cout << verify::format_line(r) << std::endl;
      });
      fs::path out = ver_c.out;
      if (out.empty()) {
        const char* env = std::getenv("SPATIAL_ADAPT_OUT");
        out = fs::path(env && *env ? env : "out") / "verify";
      }
      write_json(out / ("verify_" + suite_name + ".json"), verify::to_json(results));
      bool ok = true;
      for (const auto& r : results) ok = ok && r.passed;
      return ok ? 0 : 1;
    } else if (sweep->parsed() || run->parsed()) {
      const Common& c = sweep->parsed() ? sweep_c : run_c;
      apply_threads(c);
      const ExperimentConfig cfg = load(c);
      RunOptions opts;
      opts.artifacts = run->parsed();
      list_files(run_experiment(cfg, out_dir(c, cfg), opts));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
