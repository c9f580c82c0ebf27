#pragma once

// Fresnel-zone geometry for one transmitter/receiver pair in the plane that
// contains both antennas and the subject. Zone n is bounded by the ellipse
// whose foci are the antennas and whose path-length excess over the direct
// path is n * wavelength / 2.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "csisense/detail/text.hpp"

namespace csisense {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2, Point2) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

class TransceiverGeometry {
 public:
  TransceiverGeometry(Point2 tx, Point2 rx, double wavelength)
      : tx_(tx), rx_(rx), wavelength_(wavelength) {
    if (!(wavelength > 0.0)) throw std::invalid_argument("geometry: wavelength must be positive");
    if (!(distance(tx, rx) > 0.0)) throw std::invalid_argument("geometry: tx and rx coincide");
  }

  /// Tx at the origin, Rx at (separation, 0).
  static TransceiverGeometry on_axis(double separation, double wavelength) {
    return TransceiverGeometry({0.0, 0.0}, {separation, 0.0}, wavelength);
  }

  Point2 tx() const { return tx_; }
  Point2 rx() const { return rx_; }
  double wavelength() const { return wavelength_; }
  double separation() const { return distance(tx_, rx_); }
  Point2 midpoint() const { return 0.5 * (tx_ + rx_); }

  /// Unit vector perpendicular to the Tx->Rx axis.
  Point2 bisector_direction() const {
    const double l = separation();
    return {-(rx_.y - tx_.y) / l, (rx_.x - tx_.x) / l};
  }

  /// Point on the perpendicular bisector at `offset` meters from the midpoint.
  Point2 bisector_point(double offset) const { return midpoint() + offset * bisector_direction(); }

 private:
  Point2 tx_;
  Point2 rx_;
  double wavelength_;
};

/// Excess length of the reflected path Tx -> point -> Rx over Tx -> Rx.
inline double path_difference(Point2 point, const TransceiverGeometry& geom) {
  const double d = distance(geom.tx(), point) + distance(point, geom.rx()) - geom.separation();
  return d < 0.0 ? 0.0 : d;  // rounding on the LoS segment
}

/// Smallest n with path_difference <= n * wavelength / 2. Boundaries belong
/// to the zone they close.
inline std::size_t zone_index(Point2 point, const TransceiverGeometry& geom) {
  const double half = geom.wavelength() / 2.0;
  const double pd = path_difference(point, geom);
  auto n = static_cast<std::size_t>(std::ceil(pd / half));
  // The quotient can land a hair off an integer; settle against products.
  while (n > 0 && pd <= static_cast<double>(n - 1) * half) --n;
  while (pd > static_cast<double>(n) * half) ++n;
  return n;
}

/// |Q_n O|: distance from the Tx-Rx midpoint to the n-th boundary along the
/// perpendicular bisector, sqrt(n^2 l^2 / 16 + n l d / 4) with l the
/// wavelength and d the antenna separation.
inline double zone_boundary_distance(std::size_t n, double wavelength, double separation) {
  if (!(wavelength > 0.0)) throw std::invalid_argument("zone_boundary_distance: wavelength must be positive");
  if (!(separation > 0.0)) throw std::invalid_argument("zone_boundary_distance: separation must be positive");
  if (n == 0) return 0.0;
  const double nl = static_cast<double>(n) * wavelength;
  return std::sqrt(nl * nl / 16.0 + nl * separation / 4.0);
}

struct FresnelRow {
  std::size_t n = 0;
  double distance = 0.0;
};

class FresnelLookupTable {
 public:
  FresnelLookupTable(double wavelength, double separation, std::vector<FresnelRow> rows)
      : wavelength_(wavelength), separation_(separation), rows_(std::move(rows)) {}

  double wavelength() const { return wavelength_; }
  double separation() const { return separation_; }
  const std::vector<FresnelRow>& rows() const { return rows_; }
  std::size_t n_max() const { return rows_.empty() ? 0 : rows_.back().n; }

  /// Zone containing a subject at `offset` meters from the midpoint on the
  /// bisector, or nullopt beyond the table.
  std::optional<std::size_t> containing_zone(double offset) const {
    for (const auto& row : rows_) {
      if (offset <= row.distance) return row.n;
    }
    return std::nullopt;
  }

  /// Aligned two-column text: "n  distance_m".
  void write_text(std::ostream& out) const {
    char buf[64];
    out << "   n   distance_m\n";
    for (const auto& row : rows_) {
      std::snprintf(buf, sizeof(buf), "%4zu   %10.6f\n", row.n, row.distance);
      out << buf;
    }
  }

  /// Tab-separated rows with a header; distances in shortest exact form.
  void write_rows(std::ostream& out) const {
    out << "n\tdistance_m\n";
    for (const auto& row : rows_) out << row.n << '\t' << detail::format_double(row.distance) << '\n';
  }

 private:
  double wavelength_;
  double separation_;
  std::vector<FresnelRow> rows_;
};

inline FresnelLookupTable build_lookup_table(double wavelength, double separation, std::size_t n_max) {
  std::vector<FresnelRow> rows;
  rows.reserve(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    rows.push_back({n, zone_boundary_distance(n, wavelength, separation)});
  }
  return FresnelLookupTable(wavelength, separation, std::move(rows));
}

/// Phase offset accumulated by the excess path at boundary n.
inline double path_phase_shift(std::size_t n) { return (n % 2 == 0) ? 0.0 : std::numbers::pi; }

/// Excess-path shift plus the pi incurred on reflection: pi for even zones,
/// 2*pi for odd zones.
inline double combined_phase_shift(std::size_t n) {
  if (n == 0) throw std::invalid_argument("combined_phase_shift: zone 0 has no reflected path");
  return path_phase_shift(n) + std::numbers::pi;
}

struct ZoneRecommendation {
  std::size_t n_odd = 1;
  double boundary_distance = 0.0;
  /// Set when the target lies beyond the largest odd boundary searched.
  bool beyond_range = false;
};

/// Odd zone whose boundary lies closest to the target offset; ties go to the
/// smaller n. The search covers zones up to `n_max`.
inline ZoneRecommendation recommend_odd_zone(double target_distance, double wavelength,
                                             double separation, std::size_t n_max = 99) {
  if (!(target_distance >= 0.0)) throw std::invalid_argument("recommend_odd_zone: negative target");
  if (n_max < 1) n_max = 1;
  ZoneRecommendation best;
  best.boundary_distance = zone_boundary_distance(1, wavelength, separation);
  double best_gap = std::abs(best.boundary_distance - target_distance);
  double largest = best.boundary_distance;
  for (std::size_t n = 3; n <= n_max; n += 2) {
    const double d = zone_boundary_distance(n, wavelength, separation);
    largest = d;
    const double gap = std::abs(d - target_distance);
    if (gap < best_gap) {
      best = {n, d, false};
      best_gap = gap;
    }
  }
  best.beyond_range = target_distance > largest;
  return best;
}

}  // namespace csisense
