#include "dkucb/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace dkucb {

bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r) {
  const Vec2 d = b - a;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {a.x - r.min.x, r.max.x - a.x, a.y - r.min.y, r.max.y - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  return true;
}

bool segment_blocked(Vec2 a, Vec2 b, std::span<const Rect> obstacles) {
  return std::any_of(obstacles.begin(), obstacles.end(),
                     [&](const Rect& r) { return segment_intersects_rect(a, b, r); });
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("polyline needs at least two points");
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double len = distance(points_[i - 1], points_[i]);
    if (len <= 0.0) throw std::invalid_argument("polyline has a zero-length segment");
    cumulative_.push_back(cumulative_.back() + len);
  }
}

bool Polyline::closed() const { return points_.size() > 2 && points_.front() == points_.back(); }

std::size_t Polyline::segment_index(double s) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const auto idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  return std::clamp<std::size_t>(idx, 1, points_.size() - 1) - 1;
}

Vec2 Polyline::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_index(s);
  const double seg = cumulative_[i + 1] - cumulative_[i];
  const double u = (s - cumulative_[i]) / seg;
  return points_[i] + (points_[i + 1] - points_[i]) * u;
}

Vec2 Polyline::direction_at(double s) const {
  const std::size_t i = segment_index(std::clamp(s, 0.0, length()));
  const Vec2 d = points_[i + 1] - points_[i];
  return d * (1.0 / norm(d));
}

Polyline Polyline::reversed() const {
  return Polyline(std::vector<Vec2>(points_.rbegin(), points_.rend()));
}

}  // namespace dkucb
