#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace fairtask {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Vec2, Vec2) noexcept = default;
};

inline constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Disc {
  Vec2 center;
  double radius = 0.0;
};

/// Closest point to `p` on segment `s`.
inline Vec2 closest_point(const Segment& s, Vec2 p) noexcept {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return s.a;
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return s.a + d * t;
}

inline double point_segment_distance(Vec2 p, const Segment& s) noexcept {
  return distance(p, closest_point(s, p));
}

/// Parameter t in [0,1] along `motion` where it first crosses `wall`, if any.
/// Collinear overlap is treated as no crossing (motion slides along the wall).
inline std::optional<double> segment_crossing(const Segment& motion,
                                              const Segment& wall) noexcept {
  const Vec2 r = motion.b - motion.a;
  const Vec2 s = wall.b - wall.a;
  const double denom = cross(r, s);
  if (denom == 0.0) return std::nullopt;
  const Vec2 qp = wall.a - motion.a;
  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

inline bool segments_intersect(const Segment& p, const Segment& q) noexcept {
  return segment_crossing(p, q).has_value();
}

inline double segment_segment_distance(const Segment& p, const Segment& q) noexcept {
  if (segments_intersect(p, q)) return 0.0;
  return std::min({point_segment_distance(p.a, q), point_segment_distance(p.b, q),
                   point_segment_distance(q.a, p), point_segment_distance(q.b, p)});
}

/// Parameter t in [0,1] where `motion` enters `disc`, if it starts outside.
inline std::optional<double> disc_entry(const Segment& motion, const Disc& disc) noexcept {
  const Vec2 d = motion.b - motion.a;
  const Vec2 f = motion.a - disc.center;
  const double a = dot(d, d);
  const double c = dot(f, f) - disc.radius * disc.radius;
  if (a == 0.0 || c < 0.0) return std::nullopt;
  const double b = 2.0 * dot(f, d);
  const double disc2 = b * b - 4.0 * a * c;
  if (disc2 < 0.0) return std::nullopt;
  const double t = (-b - std::sqrt(disc2)) / (2.0 * a);
  if (t < 0.0 || t > 1.0) return std::nullopt;
  return t;
}

/// Distance from a closed axis-aligned square (center, half-width) to a segment.
inline double square_segment_distance(Vec2 center, double half, const Segment& s) noexcept {
  const Vec2 lo{center.x - half, center.y - half};
  const Vec2 hi{center.x + half, center.y + half};
  auto inside = [&](Vec2 p) {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  };
  if (inside(s.a) || inside(s.b)) return 0.0;
  const Segment edges[4] = {{lo, {hi.x, lo.y}}, {{hi.x, lo.y}, hi}, {hi, {lo.x, hi.y}}, {{lo.x, hi.y}, lo}};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : edges) best = std::min(best, segment_segment_distance(e, s));
  return best;
}

}  // namespace fairtask
