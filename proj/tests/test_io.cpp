#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "ccshape/catalog.hpp"
#include "ccshape/csv_io.hpp"
#include "ccshape/run_config.hpp"
#include "ccshape/svg_render.hpp"
#include "support.hpp"

using namespace ccshape;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ccshape_io_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t k = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++k;
  return k;
}

SearchSummary n3_census() {
  SolverConfig cfg;
  cfg.n = 3;
  cfg.starts = 20;
  cfg.master_seed = 5;
  return multi_start_search(cfg, SearchMode::all_critical);
}

}  // namespace

TEST(Csv, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  for (int dim : {2, 3}) {
    const auto c = random_config(rng, 17, dim);
    std::stringstream ss;
    write_positions_csv(ss, c);
    const auto d = read_positions_csv(ss);
    ASSERT_EQ(d.dim(), dim);
    ASSERT_EQ(d.size(), c.size());
    for (std::size_t k = 0; k < c.positions().size(); ++k) EXPECT_EQ(d.positions()[k], c.positions()[k]);
    for (std::size_t k = 0; k < c.size(); ++k) EXPECT_EQ(d.masses()[k], c.masses()[k]);
  }
}

TEST(Csv, MassColumnOptional) {
  std::stringstream ss("x,y\n0,0\n1,0\n0,1\n");
  const auto c = read_positions_csv(ss);
  EXPECT_EQ(c.size(), 3u);
  EXPECT_DOUBLE_EQ(c.masses()[0], c.masses()[2]);
}

TEST(Csv, Malformed) {
  for (const char* text : {"", "a,b\n1,2\n", "x,y\n1\n", "x,y\n1,abc\n", "x,y,z\n1,2\n", "x,y\n1,2\n3,4,5\n"}) {
    std::stringstream ss(text);
    EXPECT_THROW(read_positions_csv(ss), CsvError) << text;
  }
  std::stringstream ss("x,y\n0,0\n1,nan\n");
  try {
    read_positions_csv(ss);
    FAIL();
  } catch (const CsvError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(RunConfigParse, Valid) {
  const auto rc = parse_run_config(R"({
  "schema_version": 1,
  "n": 100,
  "dim": 2,
  "masses": "equal",
  "master_seed": 11,
  "starts": 4,
  "mode": "all_critical",
  "band": {"lo": 1.0, "hi": 1.05},
  "saddle_sigmas": [0.05],
  "analysis": {"bins": 12}
})");
  EXPECT_EQ(rc.solver.n, 100);
  EXPECT_EQ(rc.solver.master_seed, 11u);
  EXPECT_EQ(rc.mode, SearchMode::all_critical);
  ASSERT_TRUE(rc.band);
  EXPECT_EQ(rc.band->hi, 1.05);
  EXPECT_EQ(rc.solver.saddle_sigmas, std::vector<double>{0.05});
  EXPECT_EQ(rc.analysis.bins, 12);
  EXPECT_EQ(rc.analysis.gap, kDefaultTierGap);
}

TEST(RunConfigParse, Errors) {
  auto error_of = [](const std::string& text) -> ConfigError {
    try {
      parse_run_config(text);
    } catch (const ConfigError& e) {
      return e;
    }
    ADD_FAILURE() << "no error for " << text;
    return ConfigError(0, "", "");
  };
  {
    const auto e = error_of("{\n  \"schema_version\": 1,\n  \"n\": 1\n}");
    EXPECT_EQ(e.field(), "n");
    EXPECT_EQ(e.line(), 3u);
  }
  {
    const auto e = error_of("{\n  \"schema_version\": 1,\n  \"n\": 5,\n  \"colour\": 2\n}");
    EXPECT_EQ(e.field(), "colour");
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_EQ(error_of("{\n  \"schema_version\": 1,\n  \"n\": 5,,\n}").line(), 3u);
  EXPECT_EQ(error_of(R"({"schema_version": 2, "n": 5})").field(), "schema_version");
  EXPECT_EQ(error_of(R"({"n": 5})").field(), "schema_version");
  EXPECT_EQ(error_of(R"({"schema_version": 1, "n": 5, "dim": 4})").field(), "dim");
  EXPECT_EQ(error_of(R"({"schema_version": 1, "n": 3, "masses": [1, 2]})").field(), "masses");
  EXPECT_EQ(error_of(R"({"schema_version": 1, "n": 3, "mode": "fast"})").field(), "mode");
  EXPECT_EQ(error_of(R"({"schema_version": 1, "n": 3, "band": {"lo": 2, "hi": 1}})").field(), "band.hi");
  EXPECT_EQ(error_of(R"({"schema_version": 1, "n": 3, "analysis": {"bins": 1}})").field(), "analysis.bins");
  EXPECT_EQ(error_of(R"({"schema_version": 1, "n": 3.5})").field(), "n");
}

TEST(CatalogStore, RoundTripAndIdempotence) {
  const auto root = fresh_dir("catalog");
  const auto s = n3_census();
  ASSERT_EQ(s.points.size(), 2u);
  SolverConfig cfg;
  cfg.n = 3;
  Catalog cat(root);
  EXPECT_TRUE(cat.all_records().empty());
  const auto first = cat.add(cfg, s.points);
  EXPECT_EQ(first.added.size(), 2u);
  const auto again = cat.add(cfg, s.points);
  EXPECT_TRUE(again.added.empty());
  EXPECT_EQ(again.duplicates, 2);

  const auto recs = cat.records("N3-d2-equal");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_LT(recs[0].complexity, recs[1].complexity);
  EXPECT_EQ(recs[0].index, 0);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& p = s.points[k];
    const auto found = cat.find(recs[k].id);
    ASSERT_TRUE(found);
    EXPECT_EQ(found->complexity, p.complexity);
    const auto xs = found->config.positions();
    const auto xp = p.shape.config.positions();
    EXPECT_TRUE(std::equal(xs.begin(), xs.end(), xp.begin(), xp.end()));
    EXPECT_EQ(found->fingerprint.spectrum, p.fingerprint.spectrum);
    EXPECT_EQ(found->fingerprint_hash, p.fingerprint.hash());
  }
  EXPECT_EQ(cat.c_min("N3-d2-equal"), recs[0].complexity);
  EXPECT_FALSE(cat.find("N3-d2-equal-0000000000000000"));
  EXPECT_FALSE(cat.find("nonsense"));

  std::ifstream idx(root / "N3-d2-equal" / "index.csv");
  std::string header, row1, row2;
  std::getline(idx, header);
  std::getline(idx, row1);
  std::getline(idx, row2);
  EXPECT_EQ(header.rfind("id,complexity", 0), 0u);
  EXPECT_EQ(row1.rfind(recs[0].id, 0), 0u);
  EXPECT_EQ(row2.rfind(recs[1].id, 0), 0u);
  fs::remove_all(root);
}

TEST(CatalogStore, Namespaces) {
  EXPECT_EQ(catalog_namespace(3, 2, {}), "N3-d2-equal");
  EXPECT_EQ(catalog_namespace(3, 3, {0.2, 0.2, 0.2}), "N3-d3-equal");
  const auto a = catalog_namespace(3, 2, {1, 2, 3});
  EXPECT_EQ(a.rfind("N3-d2-m", 0), 0u);
  EXPECT_EQ(a.size(), std::string("N3-d2-m").size() + 8);
  EXPECT_NE(a, catalog_namespace(3, 2, {1, 2, 4}));
}

TEST(Svg, DeterministicAndComplete) {
  std::mt19937_64 rng(8);
  const auto c = random_config(rng, 100, 2, true);
  const auto a = render_svg(c);
  const auto b = render_svg(c);
  EXPECT_EQ(a.svg, b.svg);
  EXPECT_FALSE(a.projected);
  EXPECT_EQ(count(a.svg, "<circle "), 100u);
  EXPECT_EQ(count(a.svg, "<line "), 99u);
  EXPECT_EQ(a.svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(a.svg.find("</svg>\n"), std::string::npos);
  EXPECT_EQ(count(a.svg, "<g"), count(a.svg, "</g>"));
}

TEST(Svg, TiersOffUsesOneColor) {
  std::mt19937_64 rng(9);
  const auto c = random_config(rng, 40, 2, true);
  SvgOptions opt;
  opt.tiers = false;
  const auto r = render_svg(c, opt);
  EXPECT_EQ(count(r.svg, "stroke=\"#555555\""), 39u);
  EXPECT_EQ(count(r.svg, "stroke=\"#ff"), 0u);
}

TEST(Svg, TierColoursFollowLadder) {
  // two short edges, one long: two tiers, red then yellow
  const auto c = MassConfiguration::equal_masses(2, {0, 0, 1, 0, 2, 0, 5, 0});
  const auto r = render_svg(c);
  ASSERT_EQ(r.ladder.tiers.size(), 2u);
  EXPECT_EQ(count(r.svg, "stroke=\"#ff0000\""), 2u);
  EXPECT_EQ(count(r.svg, "stroke=\"#ffff00\""), 1u);
}

TEST(Svg, ThreeDimensionalIsProjected) {
  const auto c = MassConfiguration::equal_masses(3, {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1});
  const auto r = render_svg(c);
  EXPECT_TRUE(r.projected);
  EXPECT_NE(r.svg.find("x-y projection"), std::string::npos);
}
