#pragma once

// Pitch coordinate frame.
//
//   x : meters to the OPPOSITION try line, [0, 100]
//   y : lateral offset from the centerline, [-35, 35] (negative = left touchline side)
//
// The posts sit at (0, 0). Their 5.6 m width is ignored; kicking data is keyed
// only by distance and angle to the post center.

#include <algorithm>
#include <cmath>
#include <string>

#include "ruckep/error.hpp"

namespace ruckep {

inline constexpr double kPitchLength = 100.0;
inline constexpr double kPitchWidth = 70.0;
inline constexpr double kHalfWidth = kPitchWidth / 2.0;
inline constexpr double kLineoutFloor = 5.0;
inline constexpr double kGridBand = 5.0;
inline constexpr int kGridRowBands = 13;  // 0-65 m from the try line
inline constexpr int kGridColBands = 14;  // 0-70 m from the left touchline

class PitchPoint {
 public:
  /// Throws DomainError when the point is off the pitch.
  PitchPoint(double x, double y) : x_(x), y_(y) {
    if (!std::isfinite(x) || x < 0.0 || x > kPitchLength)
      throw DomainError("x", "x must lie in [0, 100] m, got " + std::to_string(x));
    if (!std::isfinite(y) || std::abs(y) > kHalfWidth)
      throw DomainError("y", "y must lie in [-35, 35] m, got " + std::to_string(y));
  }

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }

  PitchPoint mirrored() const { return PitchPoint(x_, -y_); }

  friend bool operator==(const PitchPoint&, const PitchPoint&) = default;

 private:
  double x_;
  double y_;
};

struct KickGeometry {
  double distance;  // meters from the spot to the post center
  double angle;     // radians off the straight-on line, [0, pi/2)
};

inline KickGeometry to_kick_geometry(const PitchPoint& p) {
  if (p.x() <= 0.0)
    throw DomainError("x", "kick angle undefined on the try line (x = 0)");
  const double ay = std::abs(p.y());
  return KickGeometry{std::hypot(p.x(), ay), std::atan2(ay, p.x())};
}

/// Lineout location after a kick to touch gaining `d_touch` meters, floored at the 5 m line.
/// The lateral coordinate is unchanged.
inline double touch_translation(double x, double d_touch) {
  if (!std::isfinite(x) || x < 0.0 || x > kPitchLength)
    throw DomainError("x", "x must lie in [0, 100] m");
  if (!std::isfinite(d_touch) || d_touch < 0.0)
    throw DomainError("d_touch", "d_touch must be a finite value >= 0");
  return std::max(kLineoutFloor, x - d_touch);
}

inline double from_left_touchline(double dist) {
  if (!std::isfinite(dist) || dist < 0.0 || dist > kPitchWidth)
    throw DomainError("dist", "distance from left touchline must lie in [0, 70] m");
  return dist - kHalfWidth;
}

/// Center of a 5 m x 5 m kicking-grid cell. Rows count from the try line,
/// columns from the left touchline.
inline PitchPoint grid_cell_center(int row_band, int col_band) {
  if (row_band < 0 || row_band >= kGridRowBands)
    throw DomainError("row_band", "row band index must lie in [0, 12]");
  if (col_band < 0 || col_band >= kGridColBands)
    throw DomainError("col_band", "column band index must lie in [0, 13]");
  const double x = kGridBand * row_band + kGridBand / 2.0;
  const double from_left = kGridBand * col_band + kGridBand / 2.0;
  return PitchPoint(x, from_left_touchline(from_left));
}

}  // namespace ruckep
