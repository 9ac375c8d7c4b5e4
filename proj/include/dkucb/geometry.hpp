#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace dkucb {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Axis-aligned rectangle, closed.
struct Rect {
  Vec2 min;
  Vec2 max;

  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
};

/// True if the closed segment [a, b] touches the rectangle (Liang-Barsky clip).
bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r);

/// True if the segment [a, b] touches any of the rectangles.
bool segment_blocked(Vec2 a, Vec2 b, std::span<const Rect> obstacles);

/// Piecewise-linear path parameterized by arc length.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  /// Closed when the first and last vertices coincide.
  bool closed() const;

  /// Position at arc length s, clamped to [0, length].
  Vec2 point_at(double s) const;
  /// Unit tangent at arc length s.
  Vec2 direction_at(double s) const;

  Polyline reversed() const;

 private:
  std::size_t segment_index(double s) const;

  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

}  // namespace dkucb
