#pragma once

// Two-path channel simulator: a line-of-sight path plus one reflection off a
// point reflector (the subject), evaluated per OFDM subcarrier. Also produces
// labelled synthetic gesture traces for exercising the pipeline.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "csisense/csi.hpp"
#include "csisense/detail/text.hpp"
#include "csisense/fresnel.hpp"

namespace csisense {

inline constexpr double kSpeedOfLight = 299792458.0;

struct SimConfig {
  TransceiverGeometry geometry = TransceiverGeometry::on_axis(1.2, kSpeedOfLight / 5.32e9);
  double center_frequency = 5.32e9;
  std::size_t n_subcarriers = 30;
  double subcarrier_spacing = 312.5e3;
  double los_amplitude = 20.0;
  double reflection_coefficient = 0.7;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(center_frequency > 0.0)) throw std::invalid_argument("SimConfig: center frequency must be positive");
    if (n_subcarriers < 1) throw std::invalid_argument("SimConfig: need at least one subcarrier");
    if (!(subcarrier_spacing > 0.0)) throw std::invalid_argument("SimConfig: subcarrier spacing must be positive");
    if (!(reflection_coefficient >= 0.0 && reflection_coefficient <= 1.0)) {
      throw std::invalid_argument("SimConfig: reflection coefficient must lie in [0, 1]");
    }
    if (!(noise_std >= 0.0)) throw std::invalid_argument("SimConfig: noise std must be non-negative");
    if (!(los_amplitude >= 0.0)) throw std::invalid_argument("SimConfig: LoS amplitude must be non-negative");
  }

  /// Subcarriers are centred on the carrier with uniform spacing.
  double subcarrier_frequency(std::size_t k) const {
    const double centre = (static_cast<double>(n_subcarriers) - 1.0) / 2.0;
    return center_frequency + (static_cast<double>(k) - centre) * subcarrier_spacing;
  }

  double center_wavelength() const { return kSpeedOfLight / center_frequency; }

  /// The configured antenna positions with the carrier wavelength, for zone math.
  TransceiverGeometry zone_geometry() const {
    return TransceiverGeometry(geometry.tx(), geometry.rx(), center_wavelength());
  }
};

namespace detail {

inline void fill_channel(const SimConfig& config, Point2 reflector, std::mt19937_64* rng,
                         CsiFrame& frame) {
  const auto& g = config.geometry;
  const double d_tx = distance(g.tx(), reflector);
  const double d_rx = distance(reflector, g.rx());
  if (!(d_tx > 1e-12) || !(d_rx > 1e-12)) {
    throw std::invalid_argument("simulate: reflector coincides with an antenna");
  }
  const double d_los = g.separation();
  const double d_ref = d_tx + d_rx;
  const double a_los = config.los_amplitude;
  const double a_ref = config.reflection_coefficient * a_los * d_los / d_ref;
  std::normal_distribution<double> noise(0.0, config.noise_std);
  const bool noisy = rng != nullptr && config.noise_std > 0.0;
  for (std::size_t k = 0; k < config.n_subcarriers; ++k) {
    const double wavelength = kSpeedOfLight / config.subcarrier_frequency(k);
    const double phi_los = -2.0 * std::numbers::pi * d_los / wavelength;
    const double phi_ref = -2.0 * std::numbers::pi * d_ref / wavelength + std::numbers::pi;
    Complex h = std::polar(a_los, phi_los) + std::polar(a_ref, phi_ref);
    if (noisy) h += Complex(noise(*rng), noise(*rng));
    frame.set(k, 0, 0, h);
  }
}

}  // namespace detail

/// One frame (t = 0, single antenna pair) for a static reflector.
inline CsiFrame simulate_static(const SimConfig& config, Point2 reflector) {
  config.validate();
  CsiFrame frame(0.0, config.n_subcarriers, 1, 1);
  std::mt19937_64 rng(config.seed);
  detail::fill_channel(config, reflector, &rng, frame);
  return frame;
}

struct TrajectorySample {
  double time = 0.0;
  Point2 position;
};

class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TrajectorySample> samples) : samples_(std::move(samples)) {
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      if (!(samples_[i].time > samples_[i - 1].time)) {
        throw std::invalid_argument("Trajectory: times must be strictly increasing");
      }
    }
  }

  const std::vector<TrajectorySample>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }

  /// Linear interpolation, clamped to the end points.
  Point2 position_at(double t) const {
    if (t <= samples_.front().time) return samples_.front().position;
    if (t >= samples_.back().time) return samples_.back().position;
    std::size_t lo = 0, hi = samples_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (samples_[mid].time <= t ? lo : hi) = mid;
    }
    const auto& a = samples_[lo];
    const auto& b = samples_[hi];
    const double w = (t - a.time) / (b.time - a.time);
    return (1.0 - w) * a.position + w * b.position;
  }

 private:
  std::vector<TrajectorySample> samples_;
};

/// Samples the trajectory on a uniform grid from its first to its last time
/// and simulates one frame per grid point. Frame timestamps start at 0.
inline Trace simulate_trajectory(const SimConfig& config, const Trajectory& trajectory,
                                 double sample_rate, TraceMetadata metadata = {}) {
  config.validate();
  if (!(sample_rate > 0.0)) throw std::invalid_argument("simulate_trajectory: sample rate must be positive");
  if (trajectory.empty()) throw std::invalid_argument("simulate_trajectory: empty trajectory");
  const double t0 = trajectory.samples().front().time;
  const double span = trajectory.samples().back().time - t0;
  const auto n = static_cast<std::size_t>(std::floor(span * sample_rate + 1e-9)) + 1;
  std::mt19937_64 rng(config.seed);
  Trace trace(sample_rate, std::move(metadata));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    CsiFrame frame(t, config.n_subcarriers, 1, 1);
    detail::fill_channel(config, trajectory.position_at(t0 + t), &rng, frame);
    trace.push_back(std::move(frame));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Synthetic gesture dataset

/// A class of body motion: the reflector oscillates across the Fresnel
/// zones along the bisector, with a smaller sway parallel to the link.
struct GestureArchetype {
  std::string label;
  double amplitude_m = 0.03;  // peak displacement across the zones
  double frequency_hz = 1.0;  // oscillation rate
  double sway_ratio = 0.5;    // parallel sway amplitude relative to amplitude_m
};

/// Happy and anger move with larger amplitude than sad and fear.
inline std::vector<GestureArchetype> default_archetypes() {
  return {
      {"happy", 0.060, 2.2, 0.6},
      {"sad", 0.014, 0.6, 0.3},
      {"anger", 0.045, 3.4, 0.2},
      {"fear", 0.010, 1.8, 0.8},
  };
}

struct GestureDatasetSpec {
  std::size_t n_subjects = 14;
  std::vector<GestureArchetype> classes = default_archetypes();
  std::size_t reps_per_class = 60;
  /// Scale of the per-subject log-normal perturbation of archetype parameters.
  double subject_variation = 0.15;
  /// Scale of the per-repetition perturbation on top of the subject's style.
  double repetition_variation = 0.08;
  double duration_s = 2.0;
  double sample_rate = 100.0;
  /// Subject position on the bisector, meters from the link midpoint.
  double placement_offset = 0.40;

  void validate() const {
    if (n_subjects < 1 || classes.empty() || reps_per_class < 1) {
      throw std::invalid_argument("GestureDatasetSpec: all counts must be >= 1");
    }
    if (!(subject_variation >= 0.0) || !(repetition_variation >= 0.0)) {
      throw std::invalid_argument("GestureDatasetSpec: variation scales must be non-negative");
    }
    if (!(duration_s > 0.0) || !(sample_rate > 0.0)) {
      throw std::invalid_argument("GestureDatasetSpec: duration and sample rate must be positive");
    }
  }

  std::size_t total() const { return n_subjects * classes.size() * reps_per_class; }
};

inline std::string subject_token(std::size_t subject) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%02zu", subject + 1);
  return buf;
}

/// Per-subject rendition of an archetype. With zero variation every subject
/// reproduces the archetype exactly.
inline GestureArchetype subject_style(const GestureArchetype& base, std::size_t subject,
                                      std::size_t class_index, double variation, std::uint64_t seed) {
  std::mt19937_64 rng(detail::mix_seed(seed ^ detail::mix_seed(0x5eb1ec7ULL + subject * 131 + class_index)));
  std::normal_distribution<double> z(0.0, 1.0);
  GestureArchetype s = base;
  s.amplitude_m *= std::exp(variation * z(rng));
  s.frequency_hz *= std::exp(variation * z(rng));
  s.sway_ratio *= std::exp(variation * z(rng));
  return s;
}

/// Generates the trace for one (subject, class, repetition) entry. Each entry
/// draws from its own derived seed, so entries can be produced in any order.
inline Trace generate_gesture_trace(const SimConfig& config, const GestureDatasetSpec& spec,
                                    std::size_t subject, std::size_t class_index, std::size_t rep) {
  const auto style = subject_style(spec.classes.at(class_index), subject, class_index,
                                   spec.subject_variation, config.seed);
  const std::uint64_t entry_seed = detail::mix_seed(
      config.seed ^ detail::mix_seed((subject * 1009 + class_index) * 100003 + rep));
  std::mt19937_64 rng(entry_seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double amp = style.amplitude_m * std::exp(spec.repetition_variation * z(rng));
  const double freq = style.frequency_hz * std::exp(spec.repetition_variation * z(rng));
  const double sway = style.sway_ratio * amp;
  const double phi = phase(rng);
  const double phi_sway = phase(rng);

  const auto& g = config.geometry;
  const Point2 centre = g.bisector_point(spec.placement_offset);
  const Point2 across = g.bisector_direction();
  const Point2 along = (1.0 / g.separation()) * (g.rx() - g.tx());

  std::vector<TrajectorySample> samples;
  const auto n = static_cast<std::size_t>(std::floor(spec.duration_s * spec.sample_rate + 1e-9)) + 1;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.sample_rate;
    const double w = 2.0 * std::numbers::pi * freq * t;
    const Point2 p = centre + (amp * std::sin(w + phi)) * across +
                     (sway * std::sin(0.5 * w + phi_sway)) * along;
    samples.push_back({t, p});
  }

  TraceMetadata md;
  md.subject_id = subject_token(subject);
  md.label = spec.classes[class_index].label;
  md.session = "rep" + std::to_string(rep + 1);
  md.attributes["gender"] = (subject % 2 == 0) ? "female" : "male";

  SimConfig entry_config = config;
  entry_config.seed = detail::mix_seed(entry_seed);
  return simulate_trajectory(entry_config, Trajectory(std::move(samples)), spec.sample_rate,
                             std::move(md));
}

/// Visits every entry in subject-major, class, repetition order.
inline void for_each_gesture_trace(const SimConfig& config, const GestureDatasetSpec& spec,
                                   const std::function<void(Trace&&)>& visit) {
  config.validate();
  spec.validate();
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
      for (std::size_t r = 0; r < spec.reps_per_class; ++r) {
        visit(generate_gesture_trace(config, spec, s, c, r));
      }
    }
  }
}

inline std::vector<Trace> generate_gesture_dataset(const SimConfig& config, const GestureDatasetSpec& spec) {
  std::vector<Trace> out;
  out.reserve(spec.total());
  for_each_gesture_trace(config, spec, [&](Trace&& t) { out.push_back(std::move(t)); });
  return out;
}

}  // namespace csisense
