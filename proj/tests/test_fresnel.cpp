#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "csisense/fresnel.hpp"

using namespace csisense;

namespace {

TransceiverGeometry random_geometry(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-5.0, 5.0), lam(0.01, 0.2), ang(0.0, 2 * std::numbers::pi),
      sep(0.3, 4.0);
  const Point2 tx{pos(rng), pos(rng)};
  const double a = ang(rng), l = sep(rng);
  return TransceiverGeometry(tx, tx + l * Point2{std::cos(a), std::sin(a)}, lam(rng));
}

}  // namespace

TEST(PathDifference, Examples) {
  const auto g = TransceiverGeometry::on_axis(1.2, 0.06);
  EXPECT_DOUBLE_EQ(path_difference(g.midpoint(), g), 0.0);
  EXPECT_DOUBLE_EQ(path_difference(g.tx(), g), 0.0);
  EXPECT_DOUBLE_EQ(path_difference(g.rx() + Point2{0.0, 0.0}, g), 0.0);
  EXPECT_NEAR(path_difference(g.bisector_point(zone_boundary_distance(1, 0.06, 1.2)), g), 0.03, 1e-9);
}

TEST(PathDifference, BisectorInvertsBoundaryDistance) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_geometry(rng);
    for (std::size_t n = 1; n <= 40; ++n) {
      const double d = zone_boundary_distance(n, g.wavelength(), g.separation());
      for (double side : {1.0, -1.0}) {
        const Point2 q = g.midpoint() + (side * d) * g.bisector_direction();
        EXPECT_NEAR(path_difference(q, g), n * g.wavelength() / 2, 1e-9);
      }
    }
  }
}

TEST(ZoneIndex, Examples) {
  const TransceiverGeometry g({-1.5, 0.0}, {1.5, 0.0}, 4.0);  // (0, 2): path difference exactly 2
  EXPECT_EQ(zone_index({0.3, 0.0}, g), 0u);
  EXPECT_EQ(zone_index({0.0, 2.0}, g), 1u);
  const TransceiverGeometry g2({-1.5, 0.0}, {1.5, 0.0}, 2.0 / 0.7);  // 1.4 half-wavelengths
  EXPECT_EQ(zone_index({0.0, 2.0}, g2), 2u);
}

TEST(ZoneIndex, MatchesCeilingOfHalfWavelengths) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> off(-3.0, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const auto g = random_geometry(rng);
    const Point2 p = g.midpoint() + Point2{off(rng), off(rng)};
    const double pd = distance(g.tx(), p) + distance(p, g.rx()) - g.separation();
    const double half = g.wavelength() / 2;
    std::size_t n = 0;
    while (n * half < pd) ++n;
    if (std::abs(pd - n * half) < 1e-9 || std::abs(pd - (n - 1.0) * half) < 1e-9) continue;
    EXPECT_EQ(zone_index(p, g), n);
    ++checked;
  }
  EXPECT_GT(checked, 19000);
}

TEST(ZoneBoundaryDistance, Examples) {
  EXPECT_NEAR(zone_boundary_distance(8, 0.06, 1.2), 0.398, 1e-3);
  EXPECT_EQ(zone_boundary_distance(0, 0.06, 1.2), 0.0);
  const double lam = 0.125, l = 2.0;
  EXPECT_DOUBLE_EQ(zone_boundary_distance(1, lam, l), std::sqrt(lam * lam / 16 + lam * l / 4));
  EXPECT_THROW(zone_boundary_distance(1, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(zone_boundary_distance(1, 0.06, -1.0), std::invalid_argument);
}

TEST(LookupTable, RowsAndShape) {
  const auto t = build_lookup_table(0.06, 1.2, 8);
  ASSERT_EQ(t.rows().size(), 9u);
  EXPECT_EQ(t.rows().back().n, 8u);
  EXPECT_NEAR(t.rows().back().distance, 0.398, 1e-3);
  const auto single = build_lookup_table(0.06, 1.2, 0);
  ASSERT_EQ(single.rows().size(), 1u);
  EXPECT_EQ(single.rows()[0].distance, 0.0);
  EXPECT_EQ(t.containing_zone(0.0), 0u);
  EXPECT_EQ(t.containing_zone(0.1), 1u);
  EXPECT_EQ(t.containing_zone(t.rows()[3].distance), 3u);
  EXPECT_FALSE(t.containing_zone(0.5).has_value());
}

TEST(LookupTable, IncreasingWithShrinkingSpacing) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> lam(0.005, 0.5), sep(0.1, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto t = build_lookup_table(lam(rng), sep(rng), 60);
    const auto& r = t.rows();
    for (std::size_t n = 1; n < r.size(); ++n) {
      EXPECT_GT(r[n].distance, r[n - 1].distance);
      if (n >= 2) EXPECT_LT(r[n].distance - r[n - 1].distance, r[n - 1].distance - r[n - 2].distance);
    }
  }
}

TEST(LookupTable, TextAndRowsFormat) {
  const auto t = build_lookup_table(0.06, 1.2, 2);
  std::ostringstream text, rows;
  t.write_text(text);
  t.write_rows(rows);
  EXPECT_EQ(text.str(),
            "   n   distance_m\n"
            "   0     0.000000\n"
            "   1     0.135000\n"
            "   2     0.192094\n");
  EXPECT_EQ(rows.str(), "n\tdistance_m\n0\t0\n1\t0.13499999999999998\n2\t0.19209372712298545\n");
}

TEST(PhaseShift, ParityModel) {
  EXPECT_EQ(combined_phase_shift(1), 2 * std::numbers::pi);
  EXPECT_EQ(combined_phase_shift(2), std::numbers::pi);
  EXPECT_EQ(combined_phase_shift(7), 2 * std::numbers::pi);
  EXPECT_THROW(combined_phase_shift(0), std::invalid_argument);
  EXPECT_EQ(path_phase_shift(3), std::numbers::pi);
  EXPECT_EQ(path_phase_shift(4), 0.0);
}

TEST(RecommendOddZone, Examples) {
  EXPECT_EQ(recommend_odd_zone(0.0, 0.06, 1.2).n_odd, 1u);
  const auto r = recommend_odd_zone(0.40, 0.06, 1.2);
  EXPECT_EQ(r.n_odd, 9u);  // 0.4230 m lies closer than n = 7 at 0.3702 m
  EXPECT_FALSE(r.beyond_range);
  const auto capped = recommend_odd_zone(0.40, 0.06, 1.2, 8);
  EXPECT_EQ(capped.n_odd, 7u);
  EXPECT_TRUE(capped.beyond_range);
  EXPECT_THROW(recommend_odd_zone(-0.1, 0.06, 1.2), std::invalid_argument);
}

TEST(RecommendOddZone, MatchesExhaustiveScan) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> lam(0.01, 0.2), sep(0.3, 4.0), u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double l = lam(rng), s = sep(rng);
    const auto table = build_lookup_table(l, s, 30);
    const double target = u(rng) * table.rows().back().distance * 1.1;
    std::size_t best = 1;
    for (const auto& row : table.rows()) {
      if (row.n % 2 == 0) continue;
      if (std::abs(row.distance - target) < std::abs(table.rows()[best].distance - target)) best = row.n;
    }
    const auto rec = recommend_odd_zone(target, l, s, 30);
    EXPECT_EQ(rec.n_odd, best);
    EXPECT_EQ(rec.boundary_distance, table.rows()[best].distance);
    EXPECT_EQ(rec.beyond_range, target > table.rows()[29].distance);
  }
}

TEST(Geometry, Validation) {
  EXPECT_THROW(TransceiverGeometry({0, 0}, {0, 0}, 0.06), std::invalid_argument);
  EXPECT_THROW(TransceiverGeometry({0, 0}, {1, 0}, 0.0), std::invalid_argument);
}
