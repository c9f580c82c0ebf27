#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csisense/features.hpp"
#include "csisense/fresnel.hpp"
#include "csisense/sim.hpp"

using namespace csisense;

namespace {

SimConfig narrowband(double gamma = 1.0) {
  SimConfig c;
  c.n_subcarriers = 1;
  c.reflection_coefficient = gamma;
  return c;
}

double magnitude_at(const SimConfig& c, double offset) {
  return std::abs(simulate_static(c, c.geometry.bisector_point(offset)).at(0, 0, 0));
}

}  // namespace

TEST(SimulateStatic, OddBoundaryConstructiveEvenDestructive) {
  SimConfig c;  // 30 subcarriers
  c.reflection_coefficient = 1.0;
  const double lam = c.center_wavelength(), l = c.geometry.separation();
  const auto odd = simulate_static(c, c.geometry.bisector_point(zone_boundary_distance(1, lam, l)));
  const auto even = simulate_static(c, c.geometry.bisector_point(zone_boundary_distance(2, lam, l)));
  for (std::size_t k = 0; k < c.n_subcarriers; ++k) {
    EXPECT_GT(std::abs(odd.at(k, 0, 0)), c.los_amplitude);
    EXPECT_LT(std::abs(even.at(k, 0, 0)), c.los_amplitude);
  }
}

TEST(SimulateStatic, ClosedFormAtBoundaries) {
  const auto c = narrowband(0.7);
  const double lam = c.center_wavelength(), l = c.geometry.separation();
  for (std::size_t n = 1; n <= 12; ++n) {
    const double d_ref = l + n * lam / 2;
    const double a_ref = 0.7 * c.los_amplitude * l / d_ref;
    const double expected = (n % 2 == 1) ? c.los_amplitude + a_ref : c.los_amplitude - a_ref;
    EXPECT_NEAR(magnitude_at(c, zone_boundary_distance(n, lam, l)), expected, 1e-6) << "n=" << n;
  }
}

TEST(SimulateStatic, NoReflectionIsLineOfSightOnly) {
  SimConfig c;
  c.reflection_coefficient = 0.0;
  const auto f = simulate_static(c, {0.1, 0.37});
  for (const auto& h : f.matrix()) EXPECT_NEAR(std::abs(h), c.los_amplitude, 1e-12);
}

TEST(SimulateStatic, EnergyBound) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0), g(0.0, 1.0);
  SimConfig c;
  for (int trial = 0; trial < 2000; ++trial) {
    c.reflection_coefficient = g(rng);
    const Point2 q{u(rng), u(rng)};
    if (distance(q, c.geometry.tx()) < 1e-3 || distance(q, c.geometry.rx()) < 1e-3) continue;
    const double d_ref = distance(c.geometry.tx(), q) + distance(q, c.geometry.rx());
    const double bound = c.los_amplitude * (1.0 + c.reflection_coefficient * c.geometry.separation() / d_ref);
    const auto frame = simulate_static(c, q);
    for (const auto& h : frame.matrix()) EXPECT_LE(std::abs(h), bound * (1 + 1e-12));
  }
}

TEST(SimulateStatic, SubcarrierDiversity) {
  SimConfig c;
  const auto f = simulate_static(c, c.geometry.bisector_point(0.4));
  const auto a = amplitude(f);
  const auto [lo, hi] = std::minmax_element(a.values.begin(), a.values.end());
  EXPECT_GT(*hi - *lo, 1e-3);
}

TEST(SimulateStatic, DegenerateReflectorRejected) {
  SimConfig c;
  EXPECT_THROW(simulate_static(c, c.geometry.tx()), std::invalid_argument);
  EXPECT_THROW(simulate_static(c, c.geometry.rx()), std::invalid_argument);
}

TEST(SimulateStatic, OddEvenAlternationAlongBisector) {
  const auto c = narrowband(0.7);
  const double lam = c.center_wavelength(), l = c.geometry.separation();
  const double start = 0.5 * zone_boundary_distance(1, lam, l);
  const double stop = zone_boundary_distance(11, lam, l);
  const double step = 2e-5;
  std::vector<double> offs, mags;
  for (double o = start; o <= stop; o += step) {
    offs.push_back(o);
    mags.push_back(magnitude_at(c, o));
  }
  std::size_t maxima = 0, minima = 0;
  for (std::size_t i = 1; i + 1 < mags.size(); ++i) {
    const bool is_max = mags[i] > mags[i - 1] && mags[i] >= mags[i + 1];
    const bool is_min = mags[i] < mags[i - 1] && mags[i] <= mags[i + 1];
    if (!is_max && !is_min) continue;
    // nearest boundary in path-difference terms
    const double pd = path_difference(c.geometry.bisector_point(offs[i]), c.zone_geometry());
    const auto n = static_cast<std::size_t>(std::llround(pd / (lam / 2)));
    EXPECT_EQ(n % 2 == 1, is_max) << "extremum near boundary " << n;
    const double boundary = zone_boundary_distance(n, lam, l);
    EXPECT_LE(std::abs(offs[i] - boundary), lam / 8);
    (is_max ? maxima : minima)++;
  }
  EXPECT_EQ(maxima, 6u);  // boundaries 1, 3, ..., 11
  EXPECT_EQ(minima, 5u);
}

TEST(SimulateTrajectory, StationaryIsConstant) {
  SimConfig c;
  const Point2 p = c.geometry.bisector_point(0.3);
  const auto t = simulate_trajectory(c, Trajectory({{0.0, p}, {1.0, p}}), 100.0);
  ASSERT_EQ(t.size(), 101u);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_EQ(t[i].matrix(), t[0].matrix());
  EXPECT_DOUBLE_EQ(t[100].timestamp(), 1.0);
}

TEST(SimulateTrajectory, ExtremaCountEqualsZoneCrossings) {
  auto c = narrowband(0.7);
  const auto zg = c.zone_geometry();
  const double lam = c.center_wavelength(), l = c.geometry.separation();
  for (std::size_t to_zone = 2; to_zone <= 8; ++to_zone) {
    const double a = 0.5 * zone_boundary_distance(1, lam, l);
    const double b = 0.5 * (zone_boundary_distance(to_zone - 1, lam, l) + zone_boundary_distance(to_zone, lam, l));
    const Trajectory traj({{0.0, c.geometry.bisector_point(a)}, {2.0, c.geometry.bisector_point(b)}});
    const auto trace = simulate_trajectory(c, traj, 2000.0);
    const auto s = amplitude_series(trace, 0, 0, 0).values;
    std::size_t extrema = 0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if ((s[i] > s[i - 1] && s[i] >= s[i + 1]) || (s[i] < s[i - 1] && s[i] <= s[i + 1])) ++extrema;
    }
    std::size_t crossings = 0;
    std::size_t prev = zone_index(traj.position_at(0.0), zg);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      const std::size_t z = zone_index(traj.position_at(trace[i].timestamp()), zg);
      crossings += (z > prev) ? z - prev : prev - z;
      prev = z;
    }
    EXPECT_EQ(crossings, to_zone - 1);
    EXPECT_EQ(extrema, crossings) << "to zone " << to_zone;
  }
}

TEST(SimulateTrajectory, SeededNoiseIsDeterministic) {
  SimConfig c;
  c.noise_std = 0.5;
  c.seed = 99;
  const Trajectory traj({{0.0, c.geometry.bisector_point(0.3)}, {0.5, c.geometry.bisector_point(0.35)}});
  const auto a = simulate_trajectory(c, traj, 100.0);
  const auto b = simulate_trajectory(c, traj, 100.0);
  EXPECT_EQ(a, b);
  c.seed = 100;
  EXPECT_NE(simulate_trajectory(c, traj, 100.0), a);
  EXPECT_THROW(simulate_trajectory(c, Trajectory(), 100.0), std::invalid_argument);
  EXPECT_THROW(simulate_trajectory(c, traj, 0.0), std::invalid_argument);
}

TEST(GestureDataset, DefaultShapeHas3360Traces) {
  SimConfig c;
  GestureDatasetSpec spec;
  EXPECT_EQ(spec.total(), 3360u);
  std::size_t count = 0;
  std::map<std::string, std::size_t> per_label;
  for_each_gesture_trace(c, spec, [&](Trace&& t) {
    ++count;
    ++per_label[t.metadata().label];
  });
  EXPECT_EQ(count, 3360u);
  ASSERT_EQ(per_label.size(), 4u);
  for (const auto& [label, n] : per_label) EXPECT_EQ(n, 840u) << label;
}

TEST(GestureDataset, ZeroVariationSharesArchetypes) {
  for (const auto& a : default_archetypes()) {
    for (std::size_t s = 0; s < 14; ++s) {
      const auto st = subject_style(a, s, 0, 0.0, 42);
      EXPECT_EQ(st.amplitude_m, a.amplitude_m);
      EXPECT_EQ(st.frequency_hz, a.frequency_hz);
      EXPECT_EQ(st.sway_ratio, a.sway_ratio);
    }
  }
}

TEST(GestureDataset, MetadataAndDeterminism) {
  SimConfig c;
  c.noise_std = 0.5;
  c.seed = 5;
  GestureDatasetSpec spec;
  spec.n_subjects = 3;
  spec.reps_per_class = 2;
  spec.duration_s = 0.5;
  const auto a = generate_gesture_dataset(c, spec);
  const auto b = generate_gesture_dataset(c, spec);
  ASSERT_EQ(a.size(), 24u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0].metadata().subject_id, "s01");
  EXPECT_EQ(a[0].metadata().attributes.at("gender"), "female");
  EXPECT_EQ(a[8].metadata().subject_id, "s02");
  EXPECT_EQ(a[8].metadata().attributes.at("gender"), "male");
  EXPECT_EQ(a[1].metadata().session, "rep2");
  EXPECT_DOUBLE_EQ(a[0].nominal_rate(), 100.0);
  EXPECT_EQ(a[0].size(), 51u);
  EXPECT_EQ(generate_gesture_trace(c, spec, 2, 3, 1), a[23]);
}

TEST(GestureDataset, HappyFluctuatesMoreThanFear) {
  SimConfig c;
  c.noise_std = 0.5;
  c.seed = 42;
  GestureDatasetSpec spec;
  spec.n_subjects = 4;
  spec.reps_per_class = 10;
  std::map<std::string, double> sum;
  std::map<std::string, std::size_t> n;
  for_each_gesture_trace(c, spec, [&](Trace&& t) {
    for (std::size_t k = 0; k < t[0].n_subcarriers(); ++k) {
      sum[t.metadata().label] += std_dev(amplitude_series(t, k, 0, 0).values);
      ++n[t.metadata().label];
    }
  });
  EXPECT_GT(sum["happy"] / n["happy"], sum["fear"] / n["fear"]);
}
