#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "test_support.hpp"

using namespace denslice;

namespace {

// planted imbalance: group G exists only in arm t0, in a tight numeric
// cluster away from everything else. Both arms share the same H rows so the
// only cross-arm imbalance is the planted one.
Dataset planted_dataset() {
  Dataset ds;
  ds.schema = {{"GROUP", FeatureKind::Nominal, {}},
               {"X", FeatureKind::Real, {}},
               {"TREAT", FeatureKind::Nominal, {}}};
  ds.columns.resize(3);
  ds.columns[0].levels = {"G", "H"};
  ds.columns[2].levels = {"t0", "t1"};
  std::mt19937_64 gen(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> h_values;
  for (int i = 0; i < 500; ++i) h_values.push_back(5.0 + u(gen));
  for (int i = 0; i < 500; ++i) {  // arm t0, group G, X in [0, 1]
    ds.columns[0].values.push_back(0.0);
    ds.columns[1].values.push_back(u(gen));
    ds.columns[2].values.push_back(0.0);
  }
  for (int arm = 0; arm < 2; ++arm)
    for (int i = 0; i < 500; ++i) {  // group H, identical X in both arms
      ds.columns[0].values.push_back(1.0);
      ds.columns[1].values.push_back(h_values[static_cast<std::size_t>(i)]);
      ds.columns[2].values.push_back(arm);
    }
  ds.n = ds.columns[0].values.size();
  return ds;
}

PartitionConfig screen_config() {
  PartitionConfig cfg;
  cfg.proxy.knn_m = 3;
  cfg.trim_fraction = 0.0;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("planted one-arm group is flagged and removed exactly") {
  const Dataset ds = planted_dataset();
  const PositivityScreen screen = screen_positivity(ds, "TREAT", screen_config(), 0.25, 5.0);
  REQUIRE(screen.arm_levels == std::vector<std::string>{"t0", "t1"});
  REQUIRE(screen.arm_sizes == std::vector<std::size_t>{1000, 500});

  // brute-force oracle: the row set that should disappear is exactly the
  // G rows, all of them in arm t0
  std::set<std::size_t> g_rows;
  for (std::size_t i = 0; i < ds.n; ++i)
    if (ds.label(0, i) == "G") g_rows.insert(i);
  REQUIRE(g_rows.size() == 500);

  bool any_flagged = false;
  for (const ViolationCandidate& c : screen.candidates) {
    if (!c.flagged) continue;
    any_flagged = true;
    // flagged bases must cover only G rows in this construction
    for (std::size_t b = 0; b < c.arm_counts.size(); ++b)
      if (screen.arm_levels[b] == "t1") CHECK(c.arm_counts[b] == 0);
  }
  REQUIRE(any_flagged);

  const auto [filtered, report] = remove_slices(ds, "TREAT", screen);
  CHECK(report.removed_total == 500);
  CHECK(report.removed_per_arm == std::vector<std::size_t>{500, 0});
  CHECK(filtered.n == ds.n - 500);
  for (std::size_t i = 0; i < filtered.n; ++i) CHECK(filtered.label(0, i) == "H");
}

TEST_CASE("bases empty in every arm are not flagged") {
  const Dataset ds = planted_dataset();
  const PositivityScreen screen = screen_positivity(ds, "TREAT", screen_config(), 0.25, 5.0);
  for (const ViolationCandidate& c : screen.candidates) {
    std::size_t total = 0;
    for (std::size_t v : c.arm_counts) total += v;
    if (total == 0) CHECK_FALSE(c.flagged);
  }
}

TEST_CASE("balanced arms produce no flags") {
  Dataset ds;
  ds.schema = {{"X", FeatureKind::Real, {}}, {"TREAT", FeatureKind::Nominal, {}}};
  ds.columns.resize(2);
  ds.columns[1].levels = {"a", "b"};
  std::mt19937_64 gen(73);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int arm = 0; arm < 2; ++arm)
    for (int i = 0; i < 300; ++i) {
      const double x = i < 200 ? u(gen) : 5.0 + u(gen);  // same shape in both arms
      ds.columns[0].values.push_back(x);
      ds.columns[1].values.push_back(arm);
    }
  ds.n = 600;
  const PositivityScreen screen = screen_positivity(ds, "TREAT", screen_config(), 0.25, 5.0);
  for (const ViolationCandidate& c : screen.candidates) CHECK_FALSE(c.flagged);
  const auto [filtered, report] = remove_slices(ds, "TREAT", screen);
  CHECK(report.removed_total == 0);
  CHECK(filtered.n == ds.n);
}

TEST_CASE("overlapping flagged bases remove each row once") {
  Dataset ds;
  ds.schema = {{"X", FeatureKind::Real, {}}, {"TREAT", FeatureKind::Nominal, {}}};
  ds.columns.resize(2);
  ds.columns[1].levels = {"a", "b"};
  for (int i = 0; i < 20; ++i) {
    ds.columns[0].values.push_back(static_cast<double>(i));
    ds.columns[1].values.push_back(i % 2);
  }
  ds.n = 20;

  PositivityScreen screen;
  screen.arm_levels = {"a", "b"};
  screen.arm_sizes = {10, 10};
  auto base = [&](double lo, double hi) {
    ViolationCandidate c;
    Subset s;
    s.feature = 0;
    s.kind = FeatureKind::Real;
    s.iv = Interval{lo, hi, false, false};
    c.base.constraints = {s};
    c.flagged = true;
    c.arm_counts = {0, 0};
    c.arm_fractions = {0, 0};
    return c;
  };
  screen.candidates = {base(0.0, 9.0), base(5.0, 14.0)};  // overlap on [5, 9]

  const auto [filtered, report] = remove_slices(ds, "TREAT", screen);
  CHECK(report.removed_total == 15);  // union of [0,9] and [5,14]
  CHECK(filtered.n == 5);
}

TEST_CASE("screen parameters are validated") {
  const Dataset ds = planted_dataset();
  REQUIRE_THROWS_AS(screen_positivity(ds, "TREAT", screen_config(), 0.0, 5.0), error);
  REQUIRE_THROWS_AS(screen_positivity(ds, "TREAT", screen_config(), 0.25, 1.0), error);
  REQUIRE_THROWS_AS(screen_positivity(ds, "X", screen_config(), 0.25, 5.0), error);
}

TEST_CASE("screening is deterministic") {
  const Dataset ds = planted_dataset();
  const PositivityScreen a = screen_positivity(ds, "TREAT", screen_config(), 0.25, 5.0);
  const PositivityScreen b = screen_positivity(ds, "TREAT", screen_config(), 0.25, 5.0);
  const PartitionModel& model = a.models.front().second;
  CHECK(serialize_candidates(a, model.schema, model.domains, 0.25, 5.0) ==
        serialize_candidates(b, model.schema, model.domains, 0.25, 5.0));
}
