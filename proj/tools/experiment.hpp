#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spadapt/bands.hpp"
#include "spadapt/parallel.hpp"
#include "spadapt/signals.hpp"
#include "toml.hpp"

namespace spadapt::tools {

/// Validated experiment description. `raw` keeps the parsed document; its
/// canonical dump is what the provenance hash covers.
struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  ModelKind model = ModelKind::regression;
  DesignKind design = DesignKind::regular;
  std::vector<std::size_t> n{2048};
  double sigma = 1.0;
  std::vector<std::string> engines;
  bool bands = false;
  double v_n = 2.0;
  std::string band_engine = "bcart";
  std::string out;
  Json raw;
};

/// Throws ConfigError naming the offending field ("model.n[1]: ...").
ExperimentConfig load_config(const Json& doc);
ExperimentConfig load_config_file(const std::string& path);

/// 16 hex digits of FNV-1a over the canonical config dump.
std::string config_hash(const ExperimentConfig& cfg);

struct TruthSpec {
  RealFunction f;
  HolderProfile profile;
  std::string recipe;
};

TruthSpec make_truth(const ExperimentConfig& cfg);
Dataset simulate_replicate(const ExperimentConfig& cfg, const TruthSpec& truth, std::size_t n,
                           std::size_t replicate);

struct EngineOutput {
  std::string engine;
  /// Step-function estimate on the right endpoints of a regular grid.
  std::vector<double> estimate;
  Json summary;
};

EngineOutput run_engine(const std::string& engine, const Dataset& data, const Json& params,
                        std::uint64_t seed);

struct BandOutput {
  Band band;
  std::vector<double> nonadaptive_radius;
  Containment containment;
  Json summary;
};

BandOutput run_bands(const ExperimentConfig& cfg, const Dataset& data);

/// Step function on an N-cell grid evaluated at x.
double evaluate_step(const std::vector<double>& values, double x);

struct RunOptions {
  /// false: metrics and slope tables only (the `sweep` subcommand).
  bool artifacts = true;
  Exec exec = Exec::parallel;
};

/// Writes every artifact under `out` and returns the list of files written.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg,
                                                  const std::filesystem::path& out,
                                                  const RunOptions& options = {});

}  // namespace spadapt::tools
