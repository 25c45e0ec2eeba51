#include "polyprune/enclosing_disk.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "polyprune/error.hpp"
#include "polyprune/rng.hpp"

namespace polyprune {
namespace {

Circle diameter_circle(Vec2 a, Vec2 b) {
  const Vec2 c = 0.5 * (a + b);
  return {c, std::max(distance(c, a), distance(c, b))};
}

// Relative slack for membership tests; points on the boundary must not
// trigger a rebuild because of rounding.
bool inside(const Circle& c, Vec2 p) {
  return distance(c.center, p) <= c.radius * (1.0 + 1e-12) + 1e-12;
}

}  // namespace

Circle circumcircle(Vec2 a, Vec2 b, Vec2 c) {
  // Translate to a for conditioning.
  const double bx = b.x - a.x, by = b.y - a.y;
  const double cx = c.x - a.x, cy = c.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  if (d == 0.0) return {{0.0, 0.0}, std::numeric_limits<double>::infinity()};
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  const Vec2 center{a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
  const double r = std::max({distance(center, a), distance(center, b), distance(center, c)});
  return {center, r};
}

namespace {

// Smallest circle with p and q on the boundary enclosing pts[0..end).
Circle with_two(const std::vector<Vec2>& pts, std::size_t end, Vec2 p, Vec2 q) {
  Circle circ = diameter_circle(p, q);
  Circle left{{}, -1.0}, right{{}, -1.0};
  const Vec2 pq = q - p;
  for (std::size_t i = 0; i < end; ++i) {
    const Vec2 r = pts[i];
    if (inside(circ, r)) continue;
    const double cross = pq.x * (r.y - p.y) - pq.y * (r.x - p.x);
    const Circle c = circumcircle(p, q, r);
    if (!std::isfinite(c.radius)) continue;
    const Vec2 cc = c.center;
    const double side = pq.x * (cc.y - p.y) - pq.y * (cc.x - p.x);
    if (cross > 0.0) {
      const double lside = left.radius < 0 ? 0.0 : pq.x * (left.center.y - p.y) - pq.y * (left.center.x - p.x);
      if (left.radius < 0 || side > lside) left = c;
    } else if (cross < 0.0) {
      const double rside = right.radius < 0 ? 0.0 : pq.x * (right.center.y - p.y) - pq.y * (right.center.x - p.x);
      if (right.radius < 0 || side < rside) right = c;
    }
  }
  if (left.radius < 0 && right.radius < 0) return circ;
  if (left.radius < 0) return right;
  if (right.radius < 0) return left;
  return left.radius <= right.radius ? left : right;
}

Circle with_one(const std::vector<Vec2>& pts, std::size_t end, Vec2 p) {
  Circle c{p, 0.0};
  for (std::size_t i = 0; i < end; ++i) {
    const Vec2 q = pts[i];
    if (inside(c, q)) continue;
    c = c.radius == 0.0 ? diameter_circle(p, q) : with_two(pts, i, p, q);
  }
  return c;
}

}  // namespace

Circle smallest_enclosing_disk(std::span<const Vec2> points, std::uint64_t shuffle_seed) {
  if (points.empty()) throw Error(ErrorCode::InvalidInput, "no points to enclose");
  std::vector<Vec2> pts(points.begin(), points.end());
  Rng rng(shuffle_seed);
  rng.shuffle(std::span<Vec2>(pts));

  Circle c{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (inside(c, pts[i])) continue;
    c = with_one(pts, i, pts[i]);
  }
  return c;
}

}  // namespace polyprune
