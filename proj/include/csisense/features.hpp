#pragma once

// Seven per-stream statistics of a CSI amplitude series and their assembly
// into one feature vector per trace.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csisense/preprocess.hpp"

namespace csisense {

namespace detail {

inline void require_nonempty(std::span<const double> x, const char* what) {
  if (x.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
}

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Central moments 2..4 about the mean, divisor N.
struct CentralMoments {
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

inline CentralMoments central_moments(std::span<const double> x) {
  CentralMoments m;
  m.mean = mean(x);
  for (double v : x) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  const auto n = static_cast<double>(x.size());
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

}  // namespace detail

/// Population standard deviation.
inline double std_dev(std::span<const double> x) {
  detail::require_nonempty(x, "std_dev");
  return std::sqrt(detail::central_moments(x).m2);
}

/// Mean absolute deviation from the sequence mean.
inline double mean_abs_deviation(std::span<const double> x) {
  detail::require_nonempty(x, "mean_abs_deviation");
  const double mu = detail::mean(x);
  double s = 0.0;
  for (double v : x) s += std::abs(v - mu);
  return s / static_cast<double>(x.size());
}

/// Third standardized moment; 0 for constant input.
inline double skewness(std::span<const double> x) {
  detail::require_nonempty(x, "skewness");
  const auto m = detail::central_moments(x);
  if (!(m.m2 > 0.0)) return 0.0;
  return m.m3 / (m.m2 * std::sqrt(m.m2));
}

/// Non-excess kurtosis, sum (x - mean)^4 / (N sigma^4); 0 for constant input.
inline double kurtosis(std::span<const double> x) {
  detail::require_nonempty(x, "kurtosis");
  const auto m = detail::central_moments(x);
  if (!(m.m2 > 0.0)) return 0.0;
  return m.m4 / (m.m2 * m.m2);
}

/// Shannon entropy in bits of an equal-width histogram over [min, max].
inline double entropy(std::span<const double> x, std::size_t n_bins = 16) {
  detail::require_nonempty(x, "entropy");
  if (n_bins < 1) throw std::invalid_argument("entropy: need at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return 0.0;
  const double width = (hi - lo) / static_cast<double>(n_bins);
  std::vector<std::size_t> counts(n_bins, 0);
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    if (b >= n_bins) b = n_bins - 1;
    ++counts[b];
  }
  const auto n = static_cast<double>(x.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

/// Population standard deviation of the first differences.
inline double velocity_std(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("velocity_std: need at least two samples");
  std::vector<double> diff(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) diff[i] = x[i + 1] - x[i];
  return std::sqrt(detail::central_moments(diff).m2);
}

inline double median(std::span<const double> x) {
  detail::require_nonempty(x, "median");
  std::vector<double> v(x.begin(), x.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return (lower + upper) / 2.0;
}

inline constexpr std::array<std::string_view, 7> kFeatureNames = {
    "std_dev", "mean_abs_dev", "skewness", "kurtosis", "entropy", "velocity_std", "median"};

enum class Aggregation { kConcat, kMeanOverStreams };

inline std::string_view to_string(Aggregation a) {
  return a == Aggregation::kConcat ? "concat" : "mean";
}

inline Aggregation parse_aggregation(std::string_view s) {
  if (s == "concat") return Aggregation::kConcat;
  if (s == "mean" || s == "mean-over-streams") return Aggregation::kMeanOverStreams;
  throw std::invalid_argument("unknown feature aggregation '" + std::string(s) + "'");
}

struct FeatureConfig {
  std::size_t entropy_bins = 16;
  Aggregation aggregation = Aggregation::kMeanOverStreams;
};

/// All seven statistics of one series, in kFeatureNames order.
inline std::array<double, 7> stream_features(std::span<const double> x, const FeatureConfig& config = {}) {
  if (x.size() < 2) throw std::invalid_argument("stream_features: need at least two samples");
  return {std_dev(x),  mean_abs_deviation(x), skewness(x), kurtosis(x),
          entropy(x, config.entropy_bins), velocity_std(x), median(x)};
}

struct FeatureVector {
  std::vector<double> values;
  /// "<stream>:<feature>" per value.
  std::vector<std::string> layout;
};

/// Concat mode lays values out stream-major ([sc][rx][tx]) with the seven
/// features in kFeatureNames order inside each stream; mean mode averages
/// each feature across streams under the stream name "mean".
inline FeatureVector extract_trace_features(const AmplitudeTrace& trace, const FeatureConfig& config = {}) {
  if (trace.n_streams() == 0 || trace.length() < 2) {
    throw std::invalid_argument("extract_trace_features: need at least one stream of two samples");
  }
  FeatureVector out;
  if (config.aggregation == Aggregation::kConcat) {
    out.values.reserve(7 * trace.n_streams());
    out.layout.reserve(7 * trace.n_streams());
    for (std::size_t s = 0; s < trace.n_streams(); ++s) {
      const auto f = stream_features(trace.streams[s], config);
      const auto name = trace.stream_name(s);
      for (std::size_t i = 0; i < f.size(); ++i) {
        out.values.push_back(f[i]);
        out.layout.push_back(name + ":" + std::string(kFeatureNames[i]));
      }
    }
  } else {
    std::array<double, 7> sum{};
    for (const auto& stream : trace.streams) {
      const auto f = stream_features(stream, config);
      for (std::size_t i = 0; i < f.size(); ++i) sum[i] += f[i];
    }
    for (std::size_t i = 0; i < sum.size(); ++i) {
      out.values.push_back(sum[i] / static_cast<double>(trace.n_streams()));
      out.layout.push_back("mean:" + std::string(kFeatureNames[i]));
    }
  }
  for (double v : out.values) {
    if (!std::isfinite(v)) throw std::runtime_error("extract_trace_features: non-finite feature");
  }
  return out;
}

}  // namespace csisense
