#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spadapt/bcart.hpp"
#include "spadapt/io.hpp"

using namespace spadapt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spadapt_io_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("csv formatting") {
  const std::string s = format_csv({{"x", {0.5, 1.0}}, {"a,b", {0.1, -2e-300}}});
  CHECK(s == "x,\"a,b\"\r\n0.5,0.1\r\n1,-2e-300\r\n");
  CHECK_THROWS_AS(format_csv({{"x", {1.0}}, {"y", {1.0, 2.0}}}), ShapeError);
}

TEST_CASE("csv round trip keeps every bit") {
  const fs::path dir = scratch("csv");
  std::vector<double> v{0.1, 1.0 / 3.0, -1e-17, 12345.678901234567};
  write_csv(dir / "t.csv", {{"v", v}, {"w", {1, 2, 3, 4}}});
  const auto cols = read_csv(dir / "t.csv");
  REQUIRE(cols.size() == 2);
  CHECK(cols[0].name == "v");
  CHECK(cols[0].values == v);
  fs::remove_all(dir);
}

TEST_CASE("datasets round trip through csv and sidecar") {
  const fs::path dir = scratch("data");
  for (ModelKind kind : {ModelKind::regression, ModelKind::white_noise}) {
    const Dataset d = simulate(doppler_function, kind, 64, 0.5, 9);
    write_dataset(dir, "d", d);
    const Dataset back = read_dataset(dir / "d.csv");
    CHECK(back.kind == kind);
    CHECK(back.n == 64);
    CHECK(back.sigma == 0.5);
    CHECK(back.seed == 9);
    CHECK(back.y == d.y);
    CHECK(back.design == d.design);
    CHECK(back.max_level == d.max_level);
  }
  fs::remove_all(dir);
}

TEST_CASE("summary json") {
  const Dataset d = simulate(doppler_function, ModelKind::white_noise, 8, 1.0, 1);
  const BcartFit fit = fit_exact(d, GaltonWatsonPrior{4.0, SplitDecay::linear, -1});
  const Json j = summary_json(fit);
  CHECK(j["engine"] == "bcart");
  CHECK(j["inclusion"].size() == 15);
  CHECK(j["inclusion"]["0:0"].get<double>() == fit.inclusion[1]);
  CHECK(node_key({2, 3}) == "2:3");
  const fs::path dir = scratch("json");
  write_json(dir / "s.json", j);
  CHECK(Json::parse(slurp(dir / "s.json")) == j);
  fs::remove_all(dir);
}
