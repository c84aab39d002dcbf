#pragma once

#include "smocklab/pattern.hpp"

#include <span>
#include <vector>

namespace smocklab {

struct PleatSampling {
  enum class Kind { Midpoints, Poisson, Explicit };
  Kind kind = Kind::Midpoints;
  double radius = 1.0;        // Poisson-disk radius
  std::vector<Vec2> points;   // explicit positions
};

struct GridFreeInput {
  std::vector<std::vector<Vec2>> lines;  // polylines, >= 2 points each
  PleatSampling sampling;
};

/// Pleat positions chosen by the sampling rule (no graph construction).
std::vector<Vec2> sample_pleat_nodes(const GridFreeInput& input);

/// Builds an explicit-kind pattern: stitching points triangulated with the
/// line segments enforced, each pleat node wired to its neighbours in the
/// Delaunay triangulation of the stitching points plus itself, and pleat nodes
/// triangulated among themselves.
SmockingPattern build_gridfree(const GridFreeInput& input);

/// Edges incident to `q` in the Delaunay triangulation of `points` plus `q`,
/// reported as indices into `points`.
std::vector<int> local_delaunay_neighbors(std::span<const Vec2> points, const Vec2& q);

/// Appends pleat vertices, each wired by the same local Delaunay rule against
/// the pattern's existing vertices.
SmockingPattern insert_pleat_nodes(const SmockingPattern& p, std::span<const Vec2> positions);

}  // namespace smocklab
