#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "experiment.hpp"
#include "toml.hpp"

using namespace spadapt;
using namespace spadapt::tools;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& toml) {
  try {
    load_config(parse_toml(toml));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("toml subset") {
  const Json j = parse_toml(R"(# leading comment
name = "demo"   # trailing comment
count = 1_000
ratio = -2.5e-1
flag = true
list = [1, 2,
        3,]   # spans lines
inline = { a = 1, b = "x" }
dotted.key = 'literal \n'

[table.sub]
"quoted key" = "tab\tquote\""
big = inf
)");
  CHECK(j["name"] == "demo");
  CHECK(j["count"] == 1000);
  CHECK(j["count"].is_number_integer());
  CHECK(j["ratio"].get<double>() == -0.25);
  CHECK(j["flag"] == true);
  CHECK(j["list"] == Json::array({1, 2, 3}));
  CHECK(j["inline"]["b"] == "x");
  CHECK(j["dotted"]["key"] == "literal \\n");
  CHECK(j["table"]["sub"]["quoted key"] == "tab\tquote\"");
  CHECK(std::isinf(j["table"]["sub"]["big"].get<double>()));
}

TEST_CASE("toml errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_toml("a = 1\nb = \n"), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_toml("a = 1\na = 2\n"), doctest::Contains("duplicate"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_toml("a = \"open\n"), doctest::Contains("unterminated"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_toml("[[t]]\n"), doctest::Contains("not supported"), ConfigError);
  CHECK_THROWS_AS(parse_toml("a = 1 b\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("a = [1 2]\n"), ConfigError);
}

TEST_CASE("schema violations point at the field") {
  CHECK(error_of("[model]\nn = [512, 100]\n").find("model.n[1]") == 0);
  CHECK(error_of("[model]\nkind = \"curved\"\n").find("model.kind") == 0);
  CHECK(error_of("[fit]\nengines = [\"bcart\", \"forest\"]\n").find("fit.engines[1]") == 0);
  CHECK(error_of("[bcart]\ngamma = 1.5\n").find("bcart.gamma") == 0);
  CHECK(error_of("[partition]\nsizes = \"units\"\n").find("partition.sizes: unknown field") == 0);
  CHECK(error_of("colour = 1\n").find("colour") == 0);
  CHECK(error_of("[model]\nkind = \"white_noise\"\n[fit]\nengines = [\"regress\"]\n").find("needs regression") != std::string::npos);
  CHECK(error_of("replicates = 0\n").find("replicates") == 0);
  CHECK(error_of("").empty());
}

TEST_CASE("bundled configs load") {
  for (const char* name : {"doppler.toml", "bm-bands.toml", "rates.toml"}) {
    const ExperimentConfig cfg = load_config_file((fs::path(SPADAPT_SOURCE_DIR) / "configs" / name).string());
    CHECK_FALSE(cfg.engines.empty());
    CHECK(config_hash(cfg).size() == 16);
    CHECK_NOTHROW(make_truth(cfg));
  }
}

TEST_CASE("config hash tracks content") {
  const ExperimentConfig a = load_config(parse_toml("seed = 1\n"));
  const ExperimentConfig b = load_config(parse_toml("seed = 1 # same\n"));
  const ExperimentConfig c = load_config(parse_toml("seed = 2\n"));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("step evaluation") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(evaluate_step(v, 0.0) == 1);
  CHECK(evaluate_step(v, 0.25) == 1);
  CHECK(evaluate_step(v, 0.26) == 2);
  CHECK(evaluate_step(v, 1.0) == 4);
}

TEST_CASE("runs are reproducible byte for byte") {
  const ExperimentConfig cfg = load_config(parse_toml(R"(
name = "tiny"
seed = 5
replicates = 3
[truth]
kind = "cusp"
t = 0.5
[model]
n = [64, 128]
[fit]
engines = ["bcart", "spikeslab", "regress", "partition", "gp"]
[regress]
iterations = 500
[bands]
enabled = true
)"));
  const fs::path a = fs::temp_directory_path() / "spadapt_run_a";
  const fs::path b = fs::temp_directory_path() / "spadapt_run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const auto files_a = run_experiment(cfg, a);
  RunOptions serial;
  serial.exec = Exec::serial;
  const auto files_b = run_experiment(cfg, b, serial);
  REQUIRE(files_a.size() == files_b.size());
  int compared = 0;
  for (const auto& f : files_a) {
    if (f.filename() == "manifest.json") continue;
    CHECK_MESSAGE(slurp(f) == slurp(b / f.filename()), f.filename().string());
    ++compared;
  }
  CHECK(compared > 10);
  CHECK(fs::exists(a / "slopes.json"));
  CHECK(fs::exists(a / "bands_n64.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}
