#pragma once

#include <cstdint>
#include <span>

#include "polyprune/geometry.hpp"

namespace polyprune {

// Exact minimum enclosing circle via randomized incremental construction
// (expected linear time). The shuffle is driven by shuffle_seed, so the result
// is a pure function of (points, shuffle_seed). Throws InvalidInput when empty.
Circle smallest_enclosing_disk(std::span<const Vec2> points, std::uint64_t shuffle_seed = 0x5EED);

// Circle through three points; radius is +inf for collinear input.
Circle circumcircle(Vec2 a, Vec2 b, Vec2 c);

}  // namespace polyprune
