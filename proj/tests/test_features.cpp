#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "csisense/features.hpp"
#include "oracles.hpp"

using namespace csisense;
using namespace oracles;

namespace {

void expect_rel(double got, LD want, LD scale, const char* what) {
  const LD tol = 1e-9L * std::max(std::fabs(want), scale);
  EXPECT_LE(std::fabs(got - want), tol) << what << ": got " << got << " want " << static_cast<double>(want);
}

}  // namespace

TEST(Features, Examples) {
  EXPECT_EQ(std_dev(std::vector<double>{1, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(std_dev(std::vector<double>{0, 2}), 1.0);
  EXPECT_DOUBLE_EQ(mean_abs_deviation(std::vector<double>{1, 2, 3}), 2.0 / 3.0);
  EXPECT_EQ(mean_abs_deviation(std::vector<double>{4, 4}), 0.0);
  EXPECT_DOUBLE_EQ(skewness(std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_GT(skewness(std::vector<double>{0, 0, 0, 1}), 0.0);
  EXPECT_NEAR(kurtosis(std::vector<double>{1, 2, 3, 4}), 1.64, 1e-9);
  EXPECT_EQ(kurtosis(std::vector<double>{5, 5, 5}), 0.0);
  EXPECT_EQ(skewness(std::vector<double>{5, 5, 5}), 0.0);
  EXPECT_EQ(entropy(std::vector<double>{2, 2, 2}), 0.0);
  EXPECT_DOUBLE_EQ(entropy(std::vector<double>{1, 1, 3, 3}, 2), 1.0);
  EXPECT_NEAR(velocity_std(std::vector<double>{0, 1, 2, 3, 4}), 0.0, 1e-15);
  EXPECT_NEAR(velocity_std(std::vector<double>{0, 1, 0, 1}), std::sqrt(8.0) / 3.0, 1e-12);
  EXPECT_NEAR(velocity_std(std::vector<double>{0, 1, 0, 1}), 0.943, 5e-4);
  EXPECT_EQ(velocity_std(std::vector<double>{3, 3, 3}), 0.0);
  EXPECT_EQ(median(std::vector<double>{1, 3, 2}), 2.0);
  EXPECT_EQ(median(std::vector<double>{1, 2, 3, 4}), 2.5);
}

TEST(Features, EmptyInputRejected) {
  const std::vector<double> e;
  EXPECT_THROW(std_dev(e), std::invalid_argument);
  EXPECT_THROW(mean_abs_deviation(e), std::invalid_argument);
  EXPECT_THROW(skewness(e), std::invalid_argument);
  EXPECT_THROW(kurtosis(e), std::invalid_argument);
  EXPECT_THROW(entropy(e), std::invalid_argument);
  EXPECT_THROW(velocity_std(std::vector<double>{1}), std::invalid_argument);
  EXPECT_THROW(median(e), std::invalid_argument);
}

TEST(Features, MatchBruteForceOracles) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = random_sequence(rng);
    const LD scale = o_std(x) + 1e-300L;
    expect_rel(std_dev(x), o_std(x), 0, "std_dev");
    expect_rel(mean_abs_deviation(x), o_mad(x), 0, "mean_abs_deviation");
    expect_rel(skewness(x), o_skew(x), 1, "skewness");
    expect_rel(kurtosis(x), o_kurt(x), 1, "kurtosis");
    expect_rel(entropy(x), o_entropy(x, 16), 1, "entropy");
    expect_rel(velocity_std(x), o_velocity(x), 0, "velocity_std");
    expect_rel(median(x), o_median(x), scale, "median");
  }
}

TEST(Features, GaussianKurtosisIsThree) {
  std::mt19937_64 rng(52);
  std::normal_distribution<double> g(5.0, 2.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = g(rng);
  EXPECT_NEAR(kurtosis(x), 3.0, 0.1);
  EXPECT_NEAR(skewness(x), 0.0, 0.05);
}

TEST(Features, ShiftAndScaleProperties) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = random_sequence(rng);
    const double c = u(rng), s = std::abs(u(rng)) + 0.1;
    std::vector<double> shifted(x), scaled(x), flipped(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      shifted[i] += c;
      scaled[i] *= s;
      flipped[i] *= -s;
    }
    const double sd = std_dev(x);
    const double tol = 1e-8 * (1 + sd);
    EXPECT_NEAR(std_dev(shifted), sd, tol);
    EXPECT_NEAR(mean_abs_deviation(shifted), mean_abs_deviation(x), tol);
    EXPECT_NEAR(velocity_std(shifted), velocity_std(x), tol);
    EXPECT_NEAR(median(shifted), median(x) + c, 1e-9 * (1 + std::abs(median(x)) + std::abs(c)));
    EXPECT_NEAR(std_dev(scaled), s * sd, 1e-9 * s * (1 + sd));
    EXPECT_NEAR(mean_abs_deviation(scaled), s * mean_abs_deviation(x), 1e-9 * s * (1 + sd));
    if (sd > 1e-6) {
      EXPECT_NEAR(skewness(shifted), skewness(x), 1e-6);
      EXPECT_NEAR(kurtosis(shifted), kurtosis(x), 1e-6);
      EXPECT_NEAR(skewness(scaled), skewness(x), 1e-9);
      EXPECT_NEAR(kurtosis(scaled), kurtosis(x), 1e-9);
      EXPECT_NEAR(kurtosis(flipped), kurtosis(x), 1e-9);
      EXPECT_NEAR(entropy(scaled), entropy(x), 1e-9);
    }
  }
  // Entropy bins follow the data range, so a dyadic shift leaves it unchanged.
  const std::vector<double> y = {0.0, 0.25, 0.5, 0.5, 1.0, 1.75, 3.0};
  std::vector<double> ys(y);
  for (auto& v : ys) v += 4.0;
  EXPECT_EQ(entropy(ys), entropy(y));
}

namespace {

AmplitudeTrace streams_trace(std::size_t n_sc, std::size_t n_rx, std::size_t n_tx, std::mt19937_64& rng) {
  std::normal_distribution<double> g(10.0, 2.0);
  AmplitudeTrace t;
  t.sample_rate = 100;
  t.n_subcarriers = n_sc;
  t.n_rx = n_rx;
  t.n_tx = n_tx;
  t.streams.assign(n_sc * n_rx * n_tx, std::vector<double>(50));
  for (auto& s : t.streams)
    for (auto& v : s) v = g(rng);
  return t;
}

}  // namespace

TEST(TraceFeatures, LayoutArithmetic) {
  std::mt19937_64 rng(54);
  const FeatureConfig concat{16, Aggregation::kConcat};
  const auto one = extract_trace_features(streams_trace(1, 1, 1, rng), concat);
  EXPECT_EQ(one.values.size(), 7u);
  EXPECT_EQ(one.layout[3], "sc0_rx0_tx0:kurtosis");
  const auto t = streams_trace(30, 3, 1, rng);
  const auto full = extract_trace_features(t, concat);
  EXPECT_EQ(full.values.size(), 630u);
  EXPECT_EQ(full.layout.size(), 630u);
  EXPECT_EQ(full.layout[7 * 5 + 6], "sc1_rx2_tx0:median");
  const auto mean = extract_trace_features(t, FeatureConfig{16, Aggregation::kMeanOverStreams});
  ASSERT_EQ(mean.values.size(), 7u);
  EXPECT_EQ(mean.layout[0], "mean:std_dev");
  for (std::size_t f = 0; f < 7; ++f) {
    double s = 0;
    for (std::size_t k = 0; k < 90; ++k) s += full.values[7 * k + f];
    EXPECT_NEAR(mean.values[f], s / 90, 1e-12 * (1 + std::abs(s)));
  }
}

TEST(TraceFeatures, DeterministicAcrossEvaluationOrder) {
  std::mt19937_64 rng(55);
  const auto t = streams_trace(4, 2, 1, rng);
  const FeatureConfig concat{16, Aggregation::kConcat};
  const auto a = extract_trace_features(t, concat);
  std::vector<double> manual;
  for (std::size_t s = t.n_streams(); s-- > 0;) {
    const auto f = stream_features(t.streams[s], concat);
    manual.insert(manual.begin(), f.begin(), f.end());
  }
  EXPECT_EQ(a.values, manual);
  EXPECT_EQ(extract_trace_features(t, concat).values, a.values);
}

TEST(TraceFeatures, AggregationNames) {
  EXPECT_EQ(parse_aggregation("concat"), Aggregation::kConcat);
  EXPECT_EQ(parse_aggregation("mean"), Aggregation::kMeanOverStreams);
  EXPECT_EQ(parse_aggregation("mean-over-streams"), Aggregation::kMeanOverStreams);
  EXPECT_THROW(parse_aggregation("max"), std::invalid_argument);
}
