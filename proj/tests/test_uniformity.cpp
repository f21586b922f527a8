#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "test_support.hpp"

using namespace denslice;

namespace {

// quadrature oracle: integrate the chi-squared density from 0 to x with the
// substitution x = u^2, which makes the integrand analytic for every df >= 1;
// adaptive Simpson to ~1e-12
double chisq_pdf_u(double u, double a) {
  // 2 u^{2a-1} e^{-u^2/2} / (2^a Gamma(a))
  return 2.0 * std::exp((2.0 * a - 1.0) * std::log(u) - u * u / 2.0 - a * std::log(2.0) -
                        std::lgamma(a));
}

double simpson(double lo, double hi, double a) {
  const double mid = (lo + hi) / 2.0;
  return (hi - lo) / 6.0 * (chisq_pdf_u(lo, a) + 4.0 * chisq_pdf_u(mid, a) + chisq_pdf_u(hi, a));
}

double adaptive(double lo, double hi, double a, double whole, int depth) {
  const double mid = (lo + hi) / 2.0;
  const double left = simpson(lo, mid, a), right = simpson(mid, hi, a);
  if (depth > 40 || std::abs(left + right - whole) < 1e-13)
    return left + right + (left + right - whole) / 15.0;
  return adaptive(lo, mid, a, left, depth + 1) + adaptive(mid, hi, a, right, depth + 1);
}

double upper_tail_oracle(double x, std::size_t df) {
  if (x <= 0.0) return 1.0;
  const double a = static_cast<double>(df) / 2.0;
  const double lo = 1e-12;  // integrand vanishes at 0 for df >= 1
  const double hi = std::sqrt(x);
  return 1.0 - adaptive(lo, hi, a, simpson(lo, hi, a), 0);
}

PartitionModel three_slice_model() {
  // 1-D model over [0, 1] with hand-set volumes (0.5, 0.25, 0.25)
  PartitionModel m;
  m.schema = {{"X", FeatureKind::Real, {}}};
  Domain d;
  d.name = "X";
  d.kind = FeatureKind::Real;
  d.lo = 0.0;
  d.hi = 1.0;
  d.size = 1.0;
  d.n_unique = 10;
  m.domains = {d};
  const double cuts[][2] = {{0.0, 0.5}, {0.5, 0.75}, {0.75, 1.0}};
  const double vols[] = {0.5, 0.25, 0.25};
  for (int k = 0; k < 3; ++k) {
    Slice s;
    s.id = k + 1;
    Subset c;
    c.feature = 0;
    c.kind = FeatureKind::Real;
    c.iv = Interval{cuts[k][0], cuts[k][1], k > 0, false};
    s.constraints = {c};
    s.volume = vols[k];
    s.support = 1;
    s.mean_density = 0.1;
    m.slices.push_back(std::move(s));
  }
  return m;
}

Dataset points_1d(const std::vector<double>& xs) {
  Dataset ds;
  ds.n = xs.size();
  ds.schema = {{"X", FeatureKind::Real, {}}};
  ds.columns.resize(1);
  ds.columns[0].values = xs;
  return ds;
}

}  // namespace

TEST_CASE("chisq_upper_tail") {
  SECTION("x = 0 gives probability 1") { CHECK(chisq_upper_tail(0.0, 3) == 1.0); }

  SECTION("closed form at df = 2") {
    CHECK(chisq_upper_tail(2.0, 2) == Catch::Approx(std::exp(-1.0)).margin(1e-10));
  }

  SECTION("5% critical value at df = 1") {
    CHECK(chisq_upper_tail(3.8415, 1) == Catch::Approx(upper_tail_oracle(3.8415, 1)).margin(1e-8));
    CHECK(chisq_upper_tail(3.8415, 1) == Catch::Approx(0.05).margin(1e-4));
  }

  SECTION("matches quadrature over a grid") {
    const std::size_t dfs[] = {1, 2, 3, 5, 10};
    const double xs[] = {0.1, 0.5, 1.0, 2.0, 5.0, 9.0, 15.0, 25.0};
    for (std::size_t df : dfs)
      for (double x : xs)
        CHECK(chisq_upper_tail(x, df) == Catch::Approx(upper_tail_oracle(x, df)).margin(1e-8));
  }

  SECTION("monotone decreasing in x") {
    double prev = 1.0;
    for (double x = 0.25; x < 30.0; x += 0.25) {
      const double p = chisq_upper_tail(x, 4);
      CHECK(p <= prev + 1e-15);
      prev = p;
    }
  }

  SECTION("negative input") { REQUIRE_THROWS_AS(chisq_upper_tail(-1.0, 2), error); }
}

TEST_CASE("occupancy fractions") {
  SECTION("wine partition occupancies") {
    Dataset ds = testsupport::load_wine();
    const PartitionModel model = build_partition(ds, testsupport::wine_config(1));
    const std::vector<double> phi = occupancy_fractions(model, ds);
    REQUIRE(phi.size() == 7);
    // non-empty slices first (10, 15, 15, 10)/50, then the empties
    CHECK(phi[0] == 0.2);
    CHECK(phi[1] == 0.3);
    CHECK(phi[2] == 0.3);
    CHECK(phi[3] == 0.2);
    CHECK(phi[4] == 0.0);
    CHECK(phi[5] == 0.0);
    CHECK(phi[6] == 0.0);
    CHECK(std::accumulate(phi.begin(), phi.end(), 0.0) == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("single row lands in one slice") {
    const PartitionModel m = three_slice_model();
    const std::vector<double> phi = occupancy_fractions(m, points_1d({0.9}));
    CHECK(phi == std::vector<double>{0.0, 0.0, 1.0});
  }

  SECTION("foreign rows outside the space are excluded with a count") {
    const PartitionModel m = three_slice_model();
    std::size_t outside = 0;
    const std::vector<double> phi = occupancy_fractions(m, points_1d({0.1, 0.2, 7.0}), &outside);
    CHECK(outside == 1);
    CHECK(phi[0] == 1.0);
  }
}

TEST_CASE("ordered constraints score foreign datasets by label") {
  // model whose ordered span starts at "mid" (codes anchored there)
  PartitionModel m;
  m.schema = {{"SIZE", FeatureKind::Ordered, {}}};
  Domain d;
  d.name = "SIZE";
  d.kind = FeatureKind::Ordered;
  d.lo = -0.5;
  d.hi = 1.5;
  d.size = 2.0;
  d.n_unique = 2;
  d.levels = {"mid", "high"};
  m.domains = {d};
  for (int k = 0; k < 2; ++k) {
    Slice s;
    s.id = k + 1;
    Subset c;
    c.feature = 0;
    c.kind = FeatureKind::Ordered;
    c.iv = Interval{k - 0.5, k + 0.5, false, false};
    s.constraints = {c};
    s.volume = 0.5;
    s.support = 1;
    s.mean_density = 0.1;
    m.slices.push_back(std::move(s));
  }

  // foreign dataset anchored at "low": codes differ, labels decide
  Dataset ds;
  ds.n = 4;
  ds.schema = {{"SIZE", FeatureKind::Ordered, {"low", "mid", "high"}}};
  ds.columns.resize(1);
  ds.columns[0].levels = {"low", "mid", "high"};
  ds.columns[0].values = {1.0, 2.0, 1.0, 0.0};  // mid, high, mid, low

  std::size_t outside = 0;
  const std::vector<double> phi = occupancy_fractions(m, ds, &outside);
  CHECK(outside == 1);  // "low" is outside the model's representable span
  CHECK(phi[0] == Catch::Approx(2.0 / 3.0).margin(1e-15));
  CHECK(phi[1] == Catch::Approx(1.0 / 3.0).margin(1e-15));
}

TEST_CASE("uniformity statistic") {
  SECTION("hand-computed three-slice case") {
    const PartitionModel m = three_slice_model();
    // 7 rows in slice 1, 2 in slice 2, 1 in slice 3
    std::vector<double> xs;
    for (int i = 0; i < 7; ++i) xs.push_back(0.05 + 0.05 * i);
    xs.push_back(0.6);
    xs.push_back(0.7);
    xs.push_back(0.9);
    const UniformityReport rep = uniformity_statistic(m, points_1d(xs));
    CHECK(rep.chi == Catch::Approx(0.18).margin(1e-12));
    CHECK(rep.df == 2);
    CHECK(rep.normalized == Catch::Approx(0.09).margin(1e-12));
    CHECK(rep.p_value == Catch::Approx(chisq_upper_tail(0.18, 2)).margin(1e-15));
  }

  SECTION("phi equal to volumes gives chi 0 and p 1") {
    const PartitionModel m = three_slice_model();
    std::vector<double> xs;
    for (int i = 0; i < 2; ++i) xs.push_back(0.1 + 0.1 * i);
    xs.push_back(0.6);
    xs.push_back(0.9);
    const UniformityReport rep = uniformity_statistic(m, points_1d(xs));
    CHECK(rep.chi == Catch::Approx(0.0).margin(1e-15));
    CHECK(rep.p_value == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("single-slice degenerate case") {
    Dataset ds;
    ds.n = 100;
    ds.schema = {{"X", FeatureKind::Integer, {}}, {"Y", FeatureKind::Integer, {}}};
    ds.columns.resize(2);
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b) {
        ds.columns[0].values.push_back(a);
        ds.columns[1].values.push_back(b);
      }
    PartitionConfig cfg;
    cfg.proxy.knn_m = 1;
    cfg.trim_fraction = 0.0;
    const PartitionModel model = build_partition(ds, cfg);
    REQUIRE(model.slices.size() == 1);
    const UniformityReport rep = uniformity_statistic(model, ds);
    CHECK(rep.chi == 0.0);
    CHECK(rep.df == 0);
    CHECK(rep.normalized == 0.0);
    CHECK(rep.degenerate_single_slice);
  }

  SECTION("chi is invariant under slice reordering") {
    PartitionModel m = three_slice_model();
    std::vector<double> xs{0.1, 0.2, 0.3, 0.6, 0.9, 0.95};
    const double chi1 = uniformity_statistic(m, points_1d(xs)).chi;
    std::swap(m.slices[0], m.slices[2]);
    const double chi2 = uniformity_statistic(m, points_1d(xs)).chi;
    CHECK(chi1 == Catch::Approx(chi2).margin(1e-15));
  }
}
