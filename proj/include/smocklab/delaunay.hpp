#pragma once

#include "smocklab/pattern.hpp"

#include <array>
#include <span>
#include <vector>

namespace smocklab::geom {

/// Sign of the orientation determinant: +1 when (a, b, c) turn counter-clockwise,
/// -1 clockwise, 0 collinear. Exact: floating-point filter with a rational fallback.
int orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/// +1 when d lies strictly inside the circle through the counter-clockwise
/// triangle (a, b, c), -1 strictly outside, 0 cocircular. Exact.
int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// True when the closed segments [a, b] and [c, d] cross at a point interior to
/// both (shared endpoints and collinear touching excluded).
bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

struct Triangulation {
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise

  std::vector<Edge> edges() const;
};

/// Delaunay triangulation of `points`, optionally conditioned on constraint
/// segments that must appear as edges. Legal-edge flips never cross a
/// constraint. Throws Error(Degenerate) for duplicate or all-collinear input and
/// Error(Input) when two constraints cross or a constraint runs through a point.
Triangulation delaunay(std::span<const Vec2> points, std::span<const Edge> constraints = {});

}  // namespace smocklab::geom
