#pragma once

// Gap repair (linear interpolation onto a uniform grid) and Butterworth
// low-pass denoising of per-stream CSI amplitudes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csisense/csi.hpp"

namespace csisense {

struct FilterSpec {
  double cutoff_hz = 15.0;
  double sample_rate = 100.0;
  int order = 4;
  bool zero_phase = true;

  void validate() const {
    if (!(sample_rate > 0.0)) throw std::invalid_argument("FilterSpec: sample rate must be positive");
    if (!(cutoff_hz > 0.0)) throw std::invalid_argument("FilterSpec: cutoff must be positive");
    if (!(cutoff_hz < sample_rate / 2.0)) throw std::invalid_argument("FilterSpec: cutoff must lie below Nyquist");
    if (order < 1) throw std::invalid_argument("FilterSpec: order must be >= 1");
  }

  /// Normalized digital cutoff in rad/sample.
  double normalized_cutoff() const { return 2.0 * std::numbers::pi * cutoff_hz / sample_rate; }
};

/// Resamples onto t0 + k / target_rate spanning the original time range.
/// Grid points that coincide with an original timestamp copy that frame.
inline Trace regularize(const Trace& trace, double target_rate) {
  if (trace.size() < 2) throw std::invalid_argument("regularize: need at least two frames");
  if (!(target_rate > 0.0)) throw std::invalid_argument("regularize: target rate must be positive");
  const auto& frames = trace.frames();
  const double t0 = frames.front().timestamp();
  const double span = frames.back().timestamp() - t0;
  const double period = 1.0 / target_rate;
  const double tol = 1e-9 * std::max(1.0, std::abs(t0) + span);
  const auto n = static_cast<std::size_t>(std::floor(span * target_rate + 1e-9)) + 1;

  Trace out(target_rate, trace.metadata());
  std::size_t j = 0;  // frames[j].t <= t < frames[j + 1].t
  std::vector<Complex> matrix;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) * period;
    while (j + 1 < frames.size() && frames[j + 1].timestamp() <= t + tol) ++j;
    const auto& a = frames[j];
    if (std::abs(a.timestamp() - t) <= tol) {
      out.push_back(a);
      continue;
    }
    if (j + 1 >= frames.size()) {
      // Grid overshoot within rounding of the final frame.
      break;
    }
    const auto& b = frames[j + 1];
    const double w = (t - a.timestamp()) / (b.timestamp() - a.timestamp());
    matrix.resize(a.size());
    for (std::size_t e = 0; e < a.size(); ++e) {
      matrix[e] = a.matrix()[e] + w * (b.matrix()[e] - a.matrix()[e]);
    }
    out.push_back(CsiFrame(t, a.n_subcarriers(), a.n_rx(), a.n_tx(), matrix));
  }
  return out;
}

/// One second-order section, b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
/// First-order sections use b2 = a2 = 0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> response(double omega) const {
    const auto z1 = std::polar(1.0, -omega);
    const auto z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
  }
};

/// Digital Butterworth low-pass: analog prototype poles on the unit circle,
/// scaled to the prewarped cutoff 2 fs tan(pi fc / fs), mapped through the
/// bilinear transform. Every section has unity gain at DC.
class ButterworthLowpass {
 public:
  explicit ButterworthLowpass(const FilterSpec& spec) : spec_(spec) {
    spec.validate();
    const int n = spec.order;
    const double fs2 = 2.0 * spec.sample_rate;
    const double warped = fs2 * std::tan(std::numbers::pi * spec.cutoff_hz / spec.sample_rate);
    auto bilinear = [&](std::complex<double> s) { return (fs2 + s) / (fs2 - s); };
    for (int k = 0; k < n / 2; ++k) {
      const double theta = std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n);
      const auto z = bilinear(warped * std::polar(1.0, theta));
      Biquad q;
      q.a1 = -2.0 * z.real();
      q.a2 = std::norm(z);
      const double g = (1.0 + q.a1 + q.a2) / 4.0;
      q.b0 = g;
      q.b1 = 2.0 * g;
      q.b2 = g;
      sections_.push_back(q);
    }
    if (n % 2 == 1) {
      const double z = bilinear({-warped, 0.0}).real();
      Biquad q;
      q.a1 = -z;
      const double g = (1.0 - z) / 2.0;
      q.b0 = g;
      q.b1 = g;
      sections_.push_back(q);
    }
  }

  const FilterSpec& spec() const { return spec_; }
  const std::vector<Biquad>& sections() const { return sections_; }

  /// Single-pass frequency response at `omega` rad/sample.
  std::complex<double> response(double omega) const {
    std::complex<double> h = 1.0;
    for (const auto& q : sections_) h *= q.response(omega);
    return h;
  }

  /// Causal pass with every section started at the steady state of a
  /// constant input equal to x[0].
  std::vector<double> filter(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    if (y.empty()) return y;
    for (const auto& q : sections_) {
      const double u = y.front();
      double s2 = (q.b2 - q.a2) * u;
      double s1 = (q.b1 - q.a1) * u + s2;
      for (double& v : y) {
        const double in = v;
        const double out = q.b0 * in + s1;
        s1 = q.b1 * in - q.a1 * out + s2;
        s2 = q.b2 * in - q.a2 * out;
        v = out;
      }
    }
    return y;
  }

  /// Forward-backward pass with odd-reflection padding of 3 * order samples
  /// at each end. Squared magnitude, zero phase.
  std::vector<double> filtfilt(std::span<const double> x) const {
    const std::size_t pad = 3 * static_cast<std::size_t>(spec_.order);
    if (x.size() <= pad) throw std::invalid_argument("lowpass: series must be longer than 3 * order");
    const std::size_t n = x.size();
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    auto fwd = filter(ext);
    std::vector<double> rev(fwd.rbegin(), fwd.rend());
    auto back = filter(rev);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = back[back.size() - 1 - pad - i];
    return out;
  }

  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t min_len = 3 * static_cast<std::size_t>(spec_.order);
    if (x.size() <= min_len) throw std::invalid_argument("lowpass: series must be longer than 3 * order");
    return spec_.zero_phase ? filtfilt(x) : filter(x);
  }

 private:
  FilterSpec spec_;
  std::vector<Biquad> sections_;
};

inline std::vector<double> lowpass(std::span<const double> series, const FilterSpec& spec) {
  return ButterworthLowpass(spec).apply(series);
}

/// Uniformly sampled, denoised amplitude streams of one trace. Stream s holds
/// the amplitude of entry s of the [subcarrier][rx][tx] matrix.
struct AmplitudeTrace {
  double sample_rate = 0.0;
  double start_time = 0.0;
  std::size_t n_subcarriers = 0;
  std::size_t n_rx = 0;
  std::size_t n_tx = 0;
  std::vector<std::vector<double>> streams;
  TraceMetadata metadata;

  std::size_t n_streams() const { return streams.size(); }
  std::size_t length() const { return streams.empty() ? 0 : streams.front().size(); }

  std::string stream_name(std::size_t s) const {
    const std::size_t tx = s % n_tx;
    const std::size_t rx = (s / n_tx) % n_rx;
    const std::size_t sc = s / (n_tx * n_rx);
    return "sc" + std::to_string(sc) + "_rx" + std::to_string(rx) + "_tx" + std::to_string(tx);
  }
};

/// Regularizes at the filter's sample rate, takes per-entry amplitudes and
/// low-passes each stream independently.
inline AmplitudeTrace preprocess_trace(const Trace& trace, const FilterSpec& spec) {
  const ButterworthLowpass filter(spec);
  const Trace uniform = regularize(trace, spec.sample_rate);
  const auto& first = uniform[0];
  AmplitudeTrace out;
  out.sample_rate = spec.sample_rate;
  out.start_time = first.timestamp();
  out.n_subcarriers = first.n_subcarriers();
  out.n_rx = first.n_rx();
  out.n_tx = first.n_tx();
  out.metadata = trace.metadata();
  out.streams.resize(first.size());
  std::vector<double> raw(uniform.size());
  for (std::size_t s = 0; s < first.size(); ++s) {
    for (std::size_t i = 0; i < uniform.size(); ++i) raw[i] = std::abs(uniform[i].matrix()[s]);
    out.streams[s] = filter.apply(raw);
  }
  return out;
}

}  // namespace csisense
