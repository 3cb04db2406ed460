#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kCli = HYPKOB_CLI_PATH;
const std::string kData = HYPKOB_TEST_DATA;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("hypkob_cli_" + name);
  fs::remove_all(p);
  return p;
}

fs::path shared_cache() { return fs::path(::testing::TempDir()) / "hypkob_cli_g600.bin"; }

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

std::string ball() { return "--config " + kData + "/ball.json --graph-cache " + shared_cache().string(); }

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, CheckPassesOnBall) {
  const auto out = scratch("check_ball");
  EXPECT_EQ(run("--config " + kData + "/ball.json --out " + out.string() + " check"), 0);
  const auto r = load(out / "check.json");
  EXPECT_TRUE(r["pass"].get<bool>());
  EXPECT_TRUE(r["levi"]["pass"].get<bool>());
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}

TEST(Cli, CheckFailsOnDegenerateDefiningFunction) {
  const auto out = scratch("check_cyl");
  EXPECT_EQ(run("--config " + kData + "/cylinder.json --out " + out.string() + " check"), 1);
  const auto r = load(out / "check.json");
  EXPECT_FALSE(r["levi"]["pass"].get<bool>());
  EXPECT_LE(r["levi"]["margin"].get<double>(), 1e-6);
  EXPECT_FALSE(r["contact"]["failures"].empty());
}

TEST(Cli, MissingConfigIsUsageError) {
  EXPECT_EQ(run("--config /nonexistent/hypkob.json check"), 2);
}

TEST(Cli, BadArgumentsAreUsageErrors) {
  EXPECT_EQ(run("--config " + kData + "/ball.json"), 2);
  EXPECT_EQ(run("--config " + kData + "/ball.json --metric taxicab delta"), 2);
}

TEST(Cli, DistRowsAndRowErrors) {
  const auto out = scratch("dist");
  EXPECT_EQ(run(ball() + " --out " + out.string() + " --metric d --pairs " + kData + "/pairs.csv dist"), 0);
  const auto rows = csv_rows(out / "dist.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(std::stod(rows[0][2]), 0.0);
  EXPECT_NEAR(std::stod(rows[1][2]), std::log(2.0), 1e-6);
  EXPECT_NEAR(std::stod(rows[1][3]), std::log(2.0), 1e-6);
  EXPECT_FALSE(rows[2][5].empty());
  EXPECT_FALSE(rows[3][5].empty());
  const double v = std::stod(rows[4][2]), lo = std::stod(rows[4][3]), hi = std::stod(rows[4][4]);
  EXPECT_LE(lo, v + 1e-9);
  EXPECT_LE(v, hi + 1e-9);
  EXPECT_TRUE(rows[4][5].empty());
}

TEST(Cli, DeltaReplayIsByteIdentical) {
  const auto a = scratch("delta_a"), b = scratch("delta_b");
  ASSERT_EQ(run(ball() + " --out " + a.string() + " delta"), 0);
  ASSERT_EQ(run(ball() + " --out " + b.string() + " delta"), 0);
  EXPECT_EQ(slurp(a / "delta.json"), slurp(b / "delta.json"));
  EXPECT_EQ(load(a / "delta.json")["ln4_exceedances"].get<long>(), 0);
  EXPECT_EQ(load(a / "manifest.json")["config_hash"], load(b / "manifest.json")["config_hash"]);
}

TEST(Cli, SeedOverrideChangesSample) {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  ASSERT_EQ(run(ball() + " --out " + a.string() + " delta"), 0);
  ASSERT_EQ(run(ball() + " --seed 99 --out " + b.string() + " delta"), 0);
  EXPECT_EQ(load(b / "delta.json")["seed"].get<int>(), 99);
  EXPECT_NE(slurp(a / "delta.json"), slurp(b / "delta.json"));
}

TEST(Cli, QiOnGAndDStaysInsideBracket) {
  const auto out = scratch("qi");
  EXPECT_EQ(run(ball() + " --out " + out.string() + " qi --against d"), 0);
  const auto r = load(out / "qi.json");
  EXPECT_LE(r["fit"]["C_prime"].get<double>(), r["estimate_C"]["C"].get<double>() + 1e-12);
  EXPECT_TRUE(r["fit"]["violations"].empty());
}

TEST(Cli, OrbitOnContractionConverges) {
  const auto out = scratch("orbit");
  EXPECT_EQ(run(ball() + " --out " + out.string() + " orbit"), 0);
  const auto r = load(out / "orbit.json");
  EXPECT_EQ(r["verdict"].get<std::string>(), "ConvergesTo");
  EXPECT_NEAR(r["limit"][0].get<double>(), 1.0, 1e-3);
  EXPECT_TRUE(fs::exists(out / "orbit.csv"));
}

TEST(Cli, GeodesicWritesPolyline) {
  const auto out = scratch("geodesic");
  EXPECT_EQ(run(ball() + " --out " + out.string() + " geodesic --from 0.9,0,0,0 --to 0.98,0,0,0"), 0);
  const auto r = load(out / "geodesic.json");
  EXPECT_NEAR(r["distance"].get<double>(), 0.5 * std::log(10.0 / 2.0), 1e-6);
  EXPECT_GE(csv_rows(out / "geodesic.csv").size(), 2u);
  EXPECT_EQ(run(ball() + " --out " + out.string() + " geodesic --from 0.9,0 --to 0.98,0,0,0"), 2);
}

TEST(Cli, GraphCacheRoundTrip) {
  const auto cache = scratch("cache.bin");
  const auto a = scratch("cache_a"), b = scratch("cache_b");
  const std::string cfg = "--config " + kData + "/ball.json --graph-cache " + cache.string();
  ASSERT_EQ(run(cfg + " --out " + a.string() + " orbit"), 0);
  ASSERT_TRUE(fs::exists(cache));
  ASSERT_EQ(run(cfg + " --out " + b.string() + " orbit"), 0);
  EXPECT_EQ(slurp(a / "orbit.json"), slurp(b / "orbit.json"));
}

TEST(Cli, DistMatrixOverSampledPoints) {
  const auto out = scratch("matrix");
  EXPECT_EQ(run(ball() + " --out " + out.string() + " --metric g dist --points 6"), 0);
  const auto rows = csv_rows(out / "dist_matrix.csv");
  EXPECT_EQ(rows.size(), 15u);
  for (const auto& r : rows) EXPECT_GT(std::stod(r[3]), 0.0);
  EXPECT_EQ(load(out / "dist.json")["points"].size(), 6u);
}

TEST(Cli, GeodesicPolylineCarriesSegmentLengths) {
  const auto out = scratch("geodesic_json");
  ASSERT_EQ(run(ball() + " --out " + out.string() + " geodesic --from 0.5,0.5,0.5,0.2 --to -0.3,0.8,0.1,0.4"), 0);
  const auto r = load(out / "geodesic.json");
  const auto& seg = r["polyline"]["segment_lengths"];
  ASSERT_EQ(seg.size() + 1, r["polyline"]["points"].size());
  double sum = 0.0;
  for (const auto& v : seg) sum += v.get<double>();
  EXPECT_NEAR(sum, r["length"]["value"].get<double>(), 1e-6 * sum);
}
