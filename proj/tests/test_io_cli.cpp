#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "denslice/cli.hpp"
#include "test_support.hpp"

using namespace denslice;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("denslice_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int rc = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

const std::string kDataDir = DENSLICE_DATA_DIR;

}  // namespace

TEST_CASE("csv parsing") {
  SECTION("quoted fields, escaped quotes, CRLF") {
    const CsvTable t = parse_csv("a,b\r\n\"x,y\",\"he said \"\"hi\"\"\"\r\n1,2\n");
    REQUIRE(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "x,y");
    CHECK(t.rows[0][1] == "he said \"hi\"");
  }

  SECTION("unterminated quote") { REQUIRE_THROWS_AS(parse_csv("a\n\"oops\n"), error); }

  SECTION("empty input") { REQUIRE_THROWS_AS(parse_csv(""), error); }

  SECTION("quoted empty field still counts as missing downstream") {
    const CsvTable t = parse_csv("a,b\n\"\",2\n");
    CHECK(t.rows[0][0].empty());
  }
}

TEST_CASE("schema json") {
  const auto schema = load_schema_json(
      R"([{"name":"A","kind":"real"},{"name":"B","kind":"ordered","ordered_levels":["x","y","z"]}])");
  REQUIRE(schema.size() == 2);
  CHECK(schema[1].ordered_levels.size() == 3);
  REQUIRE_THROWS_AS(load_schema_json(R"([{"name":"A","kind":"float"}])"), error);
  REQUIRE_THROWS_AS(load_schema_json(R"([{"name":"A","kind":"ordered"}])"), error);
  REQUIRE_THROWS_AS(load_schema_json("{}"), error);
}

TEST_CASE("partition serialization") {
  Dataset ds = testsupport::load_wine();
  const PartitionModel model = build_partition(ds, testsupport::wine_config(1));
  const std::string text = serialize_partition(model);

  SECTION("round-trips byte-identically") {
    const PartitionModel parsed = parse_partition(text);
    CHECK(serialize_partition(parsed) == text);
  }

  SECTION("carries the exact split threshold digits") {
    CHECK(text.find("3.3049999475479126") != std::string::npos);
  }

  SECTION("empty slices have support 0 and no mean_density") {
    const PartitionModel parsed = parse_partition(text);
    std::size_t empties = 0;
    for (const Slice& s : parsed.slices) {
      if (!s.is_empty) {
        CHECK(s.mean_density.has_value());
        continue;
      }
      ++empties;
      CHECK(s.support == 0);
      CHECK_FALSE(s.mean_density.has_value());
    }
    CHECK(empties == 3);
  }

  SECTION("conditioned arm models round-trip with their conditioning block") {
    Dataset cd;
    cd.n = 60;
    cd.schema = {{"TREAT", FeatureKind::Nominal, {}}, {"X", FeatureKind::Real, {}}};
    cd.columns.resize(2);
    cd.columns[0].levels = {"a", "b"};
    std::mt19937_64 gen(97);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 60; ++i) {
      cd.columns[0].values.push_back(i % 2);
      cd.columns[1].values.push_back(i < 30 ? u(gen) : 5.0 + u(gen));
    }
    PartitionConfig cfg;
    cfg.proxy.knn_m = 1;
    cfg.trim_fraction = 0.0;
    const auto arms = conditioned_partition(cd, cfg, "TREAT");
    for (const auto& [level, arm_model] : arms) {
      const std::string s1 = serialize_partition(arm_model);
      const PartitionModel parsed = parse_partition(s1);
      CHECK(parsed.conditioning_feature == std::optional<std::string>("TREAT"));
      CHECK(parsed.conditioning_level == std::optional<std::string>(level));
      CHECK(serialize_partition(parsed) == s1);
    }
  }

  SECTION("unsupported format versions are rejected") {
    auto j = nlohmann::json::parse(text);
    j["format_version"] = 99;
    REQUIRE_THROWS_AS(parse_partition(j.dump()), error);
  }

  SECTION("nominal and ordered constraints round-trip") {
    Dataset mixed;
    mixed.n = 40;
    mixed.schema = {{"C", FeatureKind::Nominal, {}},
                    {"O", FeatureKind::Ordered, {"lo", "mid", "hi"}},
                    {"X", FeatureKind::Real, {}}};
    mixed.columns.resize(3);
    mixed.columns[0].levels = {"a", "b", "c"};
    mixed.columns[1].levels = {"lo", "mid", "hi"};
    std::mt19937_64 gen(79);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
      mixed.columns[0].values.push_back(i % 3);
      mixed.columns[1].values.push_back(i % 3);
      mixed.columns[2].values.push_back(i < 20 ? u(gen) : 10.0 + u(gen));
    }
    PartitionConfig cfg;
    cfg.proxy.knn_m = 2;
    cfg.trim_fraction = 0.0;
    const std::string s1 = serialize_partition(build_partition(mixed, cfg));
    CHECK(serialize_partition(parse_partition(s1)) == s1);
  }
}

TEST_CASE("cli partition/metrics/render workflow") {
  TempDir tmp;
  const std::string model_path = tmp.file("wine_partition.json");

  std::string out, err;
  const int rc = cli({"partition", "--data", kDataDir + "/wine50.csv", "--schema",
                      kDataDir + "/wine50_schema.json", "--min-l", "0.1", "--min-support-frac", "0.2",
                      "--p-star", "2", "--epsilon", "0.001", "--trim", "0", "--knn-m", "1", "--seed",
                      "7", "--out", model_path},
                     &out, &err);
  REQUIRE(rc == 0);
  REQUIRE(fs::exists(model_path));
  const PartitionModel model = parse_partition(read_file(model_path));
  CHECK(model.slices.size() == 7);

  SECTION("metrics on the defining dataset") {
    std::string mout;
    const int mrc = cli({"metrics", "--model", model_path, "--data", kDataDir + "/wine50.csv",
                         "--schema", kDataDir + "/wine50_schema.json"},
                        &mout, &err);
    REQUIRE(mrc == 0);
    const auto j = nlohmann::json::parse(mout);
    CHECK(j.at("df").get<int>() == 6);
    CHECK(j.at("n_outside").get<int>() == 0);
    CHECK(j.at("chi").get<double>() > 0.0);
  }

  SECTION("render produces a tiling of rectangles") {
    const std::string svg_path = tmp.file("wine.svg");
    const int rrc = cli({"render", "--model", model_path, "--data", kDataDir + "/wine50.csv",
                         "--schema", kDataDir + "/wine50_schema.json", "--x", "FLAVANOIDS", "--y",
                         "PROLINE", "--out", svg_path},
                        &out, &err);
    REQUIRE(rrc == 0);
    const std::string svg = read_file(svg_path);
    std::size_t rects = 0, greens = 0, reds = 0;
    for (std::size_t pos = 0; (pos = svg.find("<rect", pos)) != std::string::npos; ++pos) ++rects;
    for (std::size_t pos = 0; (pos = svg.find("#2e7d32", pos)) != std::string::npos; ++pos) ++greens;
    for (std::size_t pos = 0; (pos = svg.find("#c62828", pos)) != std::string::npos; ++pos) ++reds;
    CHECK(rects == 8);  // background + 7 slices
    CHECK(greens == 4);
    CHECK(reds == 3);
    CHECK(svg.find("FLAVANOIDS") != std::string::npos);
    CHECK(svg.find("PROLINE") != std::string::npos);

    // pixel-area check: jittered grid points covered exactly once
    std::mt19937_64 gen(83);
    std::uniform_real_distribution<double> jitter(0.001, 0.009);
    std::size_t covered_once = 0, total = 0;
    for (int a = 0; a < 100; ++a)
      for (int b = 0; b < 100; ++b) {
        const double fx = 2.19 + (static_cast<double>(a) / 100.0 + jitter(gen)) * 1.74;
        const double fy = 679.5 + (static_cast<double>(b) / 100.0 + jitter(gen)) * 1001.0;
        int hits = 0;
        for (const Slice& s : model.slices) {
          double x0 = model.domains[0].lo, x1 = model.domains[0].hi;
          double y0 = model.domains[1].lo, y1 = model.domains[1].hi;
          for (const Subset& c : s.constraints) {
            if (c.feature == 0) x0 = c.iv.lo, x1 = c.iv.hi;
            if (c.feature == 1) y0 = c.iv.lo, y1 = c.iv.hi;
          }
          if (fx >= x0 && fx < x1 && fy >= y0 && fy < y1) ++hits;
        }
        ++total;
        covered_once += hits == 1;
      }
    CHECK(static_cast<double>(covered_once) / static_cast<double>(total) > 0.995);
  }

  SECTION("render rejects bad axis selections as usage errors") {
    const std::string svg_path = tmp.file("bad.svg");
    CHECK(cli({"render", "--model", model_path, "--data", kDataDir + "/wine50.csv", "--schema",
               kDataDir + "/wine50_schema.json", "--x", "FLAVANOIDS", "--y", "FLAVANOIDS", "--out",
               svg_path},
              &out, &err) == 2);
    CHECK(cli({"render", "--model", model_path, "--data", kDataDir + "/wine50.csv", "--schema",
               kDataDir + "/wine50_schema.json", "--x", "NOPE", "--y", "PROLINE", "--out", svg_path},
              &out, &err) == 2);
  }
}

TEST_CASE("cli partition with default proxy settings finds seven wine slices") {
  TempDir tmp;
  std::string out, err;
  const int rc = cli({"partition", "--data", kDataDir + "/wine50.csv", "--schema",
                      kDataDir + "/wine50_schema.json", "--min-l", "0.1", "--min-support-frac",
                      "0.2", "--p-star", "2", "--trim", "0", "--seed", "7", "--out",
                      tmp.file("default.json")},
                     &out, &err);
  REQUIRE(rc == 0);
  const PartitionModel model = parse_partition(read_file(tmp.file("default.json")));
  CHECK(model.slices.size() == 7);
  CHECK(model.config.proxy.knn_m == 5);  // max(5, ceil(0.02 * 50))
}

TEST_CASE("cli exit codes") {
  TempDir tmp;
  std::string out, err;
  CHECK(cli({"frobnicate"}, &out, &err) == 2);
  CHECK(cli({"partition", "--data", "x.csv"}, &out, &err) == 2);  // missing required flags
  CHECK(cli({"partition", "--data", tmp.file("absent.csv"), "--schema",
             kDataDir + "/wine50_schema.json", "--out", tmp.file("o.json")},
            &out, &err) == 1);
  CHECK(cli({"--help"}, &out, &err) == 0);
}

TEST_CASE("metrics on a single-slice model") {
  TempDir tmp;
  // a uniform integer grid: no density variation, one slice
  std::string csv = "A,B\n";
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b) csv += std::to_string(a) + "," + std::to_string(b) + "\n";
  write_file(tmp.file("grid.csv"), csv);
  write_file(tmp.file("grid_schema.json"),
             R"([{"name":"A","kind":"integer"},{"name":"B","kind":"integer"}])");
  std::string out, err;
  REQUIRE(cli({"partition", "--data", tmp.file("grid.csv"), "--schema", tmp.file("grid_schema.json"),
               "--knn-m", "1", "--trim", "0", "--out", tmp.file("grid.json")},
              &out, &err) == 0);
  std::string mout;
  REQUIRE(cli({"metrics", "--model", tmp.file("grid.json"), "--data", tmp.file("grid.csv"),
               "--schema", tmp.file("grid_schema.json")},
              &mout, &err) == 0);
  const auto j = nlohmann::json::parse(mout);
  CHECK(j.at("chi").get<double>() == 0.0);
  CHECK(j.at("df").get<int>() == 0);
  CHECK(j.at("degenerate_single_slice").get<bool>());
}

TEST_CASE("min_L = 1 renders without red rectangles") {
  TempDir tmp;
  std::string out, err;
  REQUIRE(cli({"partition", "--data", kDataDir + "/wine50.csv", "--schema",
               kDataDir + "/wine50_schema.json", "--min-l", "1.0", "--min-support-frac", "0.2",
               "--p-star", "2", "--trim", "0", "--knn-m", "1", "--out", tmp.file("m.json")},
              &out, &err) == 0);
  REQUIRE(cli({"render", "--model", tmp.file("m.json"), "--data", kDataDir + "/wine50.csv",
               "--schema", kDataDir + "/wine50_schema.json", "--x", "FLAVANOIDS", "--y", "PROLINE",
               "--out", tmp.file("m.svg")},
              &out, &err) == 0);
  const std::string svg = read_file(tmp.file("m.svg"));
  CHECK(svg.find("#c62828") == std::string::npos);
}

TEST_CASE("cli runs are byte-deterministic") {
  TempDir tmp;
  std::string out, err;
  for (int run = 0; run < 2; ++run) {
    REQUIRE(cli({"partition", "--data", kDataDir + "/wine50.csv", "--schema",
                 kDataDir + "/wine50_schema.json", "--proxy", "iforest", "--trees", "30",
                 "--subsample", "32", "--trim", "0.02", "--seed", "11", "--out",
                 tmp.file("run" + std::to_string(run) + ".json")},
                &out, &err) == 0);
  }
  CHECK(read_file(tmp.file("run0.json")) == read_file(tmp.file("run1.json")));
}
