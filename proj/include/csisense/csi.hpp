#pragma once

// Core channel-state types and the amplitude / phase / RSS indicators
// derived from them.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace csisense {

using Complex = std::complex<double>;

/// Dense real tensor indexed [subcarrier][rx][tx], stored row-major.
struct RealMatrix3 {
  std::size_t n_subcarriers = 0;
  std::size_t n_rx = 0;
  std::size_t n_tx = 0;
  std::vector<double> values;

  double at(std::size_t sc, std::size_t rx, std::size_t tx) const {
    return values[(sc * n_rx + rx) * n_tx + tx];
  }
};

/// One timestamped CSI measurement. The channel matrix is indexed
/// [subcarrier][rx][tx] and flattened row-major.
class CsiFrame {
 public:
  CsiFrame() = default;

  CsiFrame(double timestamp, std::size_t n_subcarriers, std::size_t n_rx,
           std::size_t n_tx)
      : timestamp_(timestamp),
        n_subcarriers_(n_subcarriers),
        n_rx_(n_rx),
        n_tx_(n_tx),
        matrix_(n_subcarriers * n_rx * n_tx) {
    if (n_subcarriers == 0 || n_rx == 0 || n_tx == 0) {
      throw std::invalid_argument("CsiFrame: all dimensions must be >= 1");
    }
  }

  CsiFrame(double timestamp, std::size_t n_subcarriers, std::size_t n_rx,
           std::size_t n_tx, std::vector<Complex> matrix)
      : CsiFrame(timestamp, n_subcarriers, n_rx, n_tx) {
    if (matrix.size() != matrix_.size()) {
      throw std::invalid_argument("CsiFrame: matrix size does not match dimensions");
    }
    for (const auto& c : matrix) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        throw std::invalid_argument("CsiFrame: non-finite channel entry");
      }
    }
    matrix_ = std::move(matrix);
  }

  double timestamp() const { return timestamp_; }
  void set_timestamp(double t) { timestamp_ = t; }
  std::size_t n_subcarriers() const { return n_subcarriers_; }
  std::size_t n_rx() const { return n_rx_; }
  std::size_t n_tx() const { return n_tx_; }
  std::size_t size() const { return matrix_.size(); }

  std::size_t index(std::size_t sc, std::size_t rx, std::size_t tx) const {
    return (sc * n_rx_ + rx) * n_tx_ + tx;
  }

  const Complex& at(std::size_t sc, std::size_t rx, std::size_t tx) const {
    check_index(sc, rx, tx);
    return matrix_[index(sc, rx, tx)];
  }

  void set(std::size_t sc, std::size_t rx, std::size_t tx, Complex value) {
    check_index(sc, rx, tx);
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      throw std::invalid_argument("CsiFrame: non-finite channel entry");
    }
    matrix_[index(sc, rx, tx)] = value;
  }

  const std::vector<Complex>& matrix() const { return matrix_; }

  bool same_shape(const CsiFrame& other) const {
    return n_subcarriers_ == other.n_subcarriers_ && n_rx_ == other.n_rx_ &&
           n_tx_ == other.n_tx_;
  }

  // Radio indicators carried by hardware logs; absent for synthetic frames.
  std::optional<int> rssi_a;
  std::optional<int> rssi_b;
  std::optional<int> rssi_c;
  std::optional<int> noise;
  std::optional<int> agc;

  friend bool operator==(const CsiFrame& a, const CsiFrame& b) {
    return a.timestamp_ == b.timestamp_ && a.same_shape(b) && a.matrix_ == b.matrix_;
  }

 private:
  void check_index(std::size_t sc, std::size_t rx, std::size_t tx) const {
    if (sc >= n_subcarriers_ || rx >= n_rx_ || tx >= n_tx_) {
      throw std::out_of_range("CsiFrame: index out of range");
    }
  }

  double timestamp_ = 0.0;
  std::size_t n_subcarriers_ = 0;
  std::size_t n_rx_ = 0;
  std::size_t n_tx_ = 0;
  std::vector<Complex> matrix_;
};

struct TraceMetadata {
  std::string subject_id;
  std::string label;
  std::string session;
  std::map<std::string, std::string> attributes;

  friend bool operator==(const TraceMetadata&, const TraceMetadata&) = default;
};

/// Ordered frames sharing one shape, with strictly increasing timestamps.
class Trace {
 public:
  Trace() = default;
  explicit Trace(double nominal_rate, TraceMetadata metadata = {})
      : nominal_rate_(nominal_rate), metadata_(std::move(metadata)) {
    if (!(nominal_rate > 0.0)) {
      throw std::invalid_argument("Trace: nominal rate must be positive");
    }
  }

  void push_back(CsiFrame frame) {
    if (!frames_.empty()) {
      if (!frames_.front().same_shape(frame)) {
        throw std::invalid_argument("Trace: frame shape differs from the trace");
      }
      if (!(frame.timestamp() > frames_.back().timestamp())) {
        throw std::invalid_argument("Trace: timestamps must be strictly increasing");
      }
    }
    frames_.push_back(std::move(frame));
  }

  const std::vector<CsiFrame>& frames() const { return frames_; }
  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  const CsiFrame& operator[](std::size_t i) const { return frames_[i]; }

  double nominal_rate() const { return nominal_rate_; }
  void set_nominal_rate(double rate) { nominal_rate_ = rate; }
  const TraceMetadata& metadata() const { return metadata_; }
  TraceMetadata& metadata() { return metadata_; }

  friend bool operator==(const Trace& a, const Trace& b) {
    return a.nominal_rate_ == b.nominal_rate_ && a.metadata_ == b.metadata_ &&
           a.frames_ == b.frames_;
  }

 private:
  double nominal_rate_ = 100.0;
  TraceMetadata metadata_;
  std::vector<CsiFrame> frames_;
};

inline RealMatrix3 amplitude(const CsiFrame& frame) {
  RealMatrix3 out{frame.n_subcarriers(), frame.n_rx(), frame.n_tx(), {}};
  out.values.reserve(frame.size());
  for (const auto& c : frame.matrix()) out.values.push_back(std::abs(c));
  return out;
}

/// Principal-value argument in (-pi, pi]; the zero entry maps to 0.
inline double principal_phase(Complex c) {
  if (c.real() == 0.0 && c.imag() == 0.0) return 0.0;
  double p = std::atan2(c.imag(), c.real());
  // atan2 yields -pi for (negative, -0.0); fold onto the closed end.
  if (p == -std::numbers::pi) p = std::numbers::pi;
  return p;
}

inline RealMatrix3 phase(const CsiFrame& frame) {
  RealMatrix3 out{frame.n_subcarriers(), frame.n_rx(), frame.n_tx(), {}};
  out.values.reserve(frame.size());
  for (const auto& c : frame.matrix()) out.values.push_back(principal_phase(c));
  return out;
}

enum class LogBase { kBase2 = 2, kBase10 = 10 };

/// 10 * log_base(|h|^2). Base 2 reproduces the aggregate-power formula as
/// written; base 10 gives conventional decibels.
inline double rss_from_aggregate(Complex h, LogBase base = LogBase::kBase2) {
  const double power = std::norm(h);
  if (!(power > 0.0)) {
    throw std::domain_error("rss_from_aggregate: zero-magnitude channel");
  }
  return base == LogBase::kBase2 ? 10.0 * std::log2(power) : 10.0 * std::log10(power);
}

struct TimedSeries {
  std::vector<double> times;
  std::vector<double> values;
};

inline TimedSeries amplitude_series(const Trace& trace, std::size_t sc, std::size_t rx,
                                    std::size_t tx) {
  TimedSeries out;
  if (trace.empty()) return out;
  const auto& first = trace[0];
  if (sc >= first.n_subcarriers() || rx >= first.n_rx() || tx >= first.n_tx()) {
    throw std::out_of_range("amplitude_series: stream index out of range");
  }
  out.times.reserve(trace.size());
  out.values.reserve(trace.size());
  for (const auto& f : trace.frames()) {
    out.times.push_back(f.timestamp());
    out.values.push_back(std::abs(f.at(sc, rx, tx)));
  }
  return out;
}

}  // namespace csisense
