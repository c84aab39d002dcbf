#include "smocklab/gridfree.hpp"

#include "smocklab/delaunay.hpp"
#include "smocklab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace smocklab {

namespace {

std::vector<Vec2> all_points(const GridFreeInput& in) {
  std::vector<Vec2> v;
  for (const auto& line : in.lines) v.insert(v.end(), line.begin(), line.end());
  return v;
}

std::pair<Vec2, Vec2> bounds(std::span<const Vec2> pts) {
  Vec2 lo = pts.front(), hi = pts.front();
  for (const Vec2& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

// Bridson's dart throwing in the bounding box, seeded deterministically; the
// stitching points act as pre-placed samples.
std::vector<Vec2> poisson_disk(std::span<const Vec2> fixed, double r) {
  const auto [lo, hi] = bounds(fixed);
  const double cell = r / std::numbers::sqrt2;
  const int gx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / cell)) + 1);
  const int gy = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / cell)) + 1);
  std::vector<std::vector<int>> grid(static_cast<std::size_t>(gx) * gy);
  std::vector<Vec2> all;
  auto slot = [&](const Vec2& p) {
    const int i = std::clamp(static_cast<int>((p.x() - lo.x()) / cell), 0, gx - 1);
    const int j = std::clamp(static_cast<int>((p.y() - lo.y()) / cell), 0, gy - 1);
    return std::pair{i, j};
  };
  auto far_enough = [&](const Vec2& p) {
    const auto [i, j] = slot(p);
    for (int dj = -2; dj <= 2; ++dj)
      for (int di = -2; di <= 2; ++di) {
        const int a = i + di, b = j + dj;
        if (a < 0 || b < 0 || a >= gx || b >= gy) continue;
        for (int k : grid[static_cast<std::size_t>(b) * gx + a])
          if ((all[k] - p).norm() < r) return false;
      }
    return true;
  };
  auto place = [&](const Vec2& p) {
    const auto [i, j] = slot(p);
    grid[static_cast<std::size_t>(j) * gx + i].push_back(static_cast<int>(all.size()));
    all.push_back(p);
  };
  for (const Vec2& p : fixed) place(p);

  std::mt19937 rng(0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> active(all.size());
  for (std::size_t k = 0; k < active.size(); ++k) active[k] = static_cast<int>(k);
  std::vector<Vec2> samples;
  while (!active.empty()) {
    const std::size_t pick = static_cast<std::size_t>(unit(rng) * active.size()) % active.size();
    const Vec2 base = all[active[pick]];
    bool found = false;
    for (int t = 0; t < 30; ++t) {
      const double ang = 2.0 * std::numbers::pi * unit(rng);
      const double rad = r * (1.0 + unit(rng));
      const Vec2 q = base + rad * Vec2(std::cos(ang), std::sin(ang));
      if (q.x() < lo.x() || q.y() < lo.y() || q.x() > hi.x() || q.y() > hi.y()) continue;
      if (!far_enough(q)) continue;
      active.push_back(static_cast<int>(all.size()));
      place(q);
      samples.push_back(q);
      found = true;
      break;
    }
    if (!found) active.erase(active.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return samples;
}

std::vector<Edge> pleat_triangulation(std::span<const Vec2> pleats) {
  std::vector<Edge> out;
  if (pleats.size() < 2) return out;
  try {
    return geom::delaunay(pleats).edges();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
  }
  // Collinear nodes: chain them in order along the line.
  std::vector<int> order(pleats.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (pleats[a].x() != pleats[b].x()) return pleats[a].x() < pleats[b].x();
    return pleats[a].y() < pleats[b].y();
  });
  for (std::size_t k = 0; k + 1 < order.size(); ++k) out.emplace_back(order[k], order[k + 1]);
  return out;
}

}  // namespace

std::vector<Vec2> sample_pleat_nodes(const GridFreeInput& input) {
  switch (input.sampling.kind) {
    case PleatSampling::Kind::Midpoints: {
      std::vector<Vec2> out;
      for (const auto& line : input.lines)
        for (std::size_t k = 0; k + 1 < line.size(); ++k) out.push_back(0.5 * (line[k] + line[k + 1]));
      return out;
    }
    case PleatSampling::Kind::Poisson:
      if (!(input.sampling.radius > 0.0)) throw Error(ErrorKind::InvalidSpec, "Poisson radius must be positive");
      return poisson_disk(all_points(input), input.sampling.radius);
    case PleatSampling::Kind::Explicit:
      return input.sampling.points;
  }
  return {};
}

std::vector<int> local_delaunay_neighbors(std::span<const Vec2> points, const Vec2& q) {
  std::vector<Vec2> pts(points.begin(), points.end());
  const int id = static_cast<int>(pts.size());
  pts.push_back(q);
  std::vector<int> out;
  for (const Edge& e : geom::delaunay(pts).edges()) {
    if (e.b == id) out.push_back(e.a);
  }
  return out;
}

SmockingPattern build_gridfree(const GridFreeInput& input) {
  if (input.lines.size() < 2) throw Error(ErrorKind::Input, "grid-free construction needs at least 2 stitching lines");
  SmockingPattern p;
  p.grid.kind = GridKind::Explicit;
  std::vector<Edge> segments;
  for (std::size_t l = 0; l < input.lines.size(); ++l) {
    const auto& line = input.lines[l];
    if (line.size() < 2) throw Error(ErrorKind::Input, "stitching line " + std::to_string(l) + " has fewer than 2 points");
    StitchingLine sl;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (!line[k].allFinite())
        throw Error(ErrorKind::Input, "stitching line " + std::to_string(l) + " has a non-finite point");
      const int id = p.vertex_count();
      p.vertices.push_back(line[k]);
      sl.vertex_ids.push_back(id);
      if (k > 0) segments.emplace_back(id - 1, id);
    }
    p.lines.push_back(std::move(sl));
  }
  const int stitch_count = p.vertex_count();

  std::set<Edge> edges;
  try {
    for (const Edge& e : geom::delaunay(p.vertices, segments).edges()) edges.insert(e);
  } catch (const Error& e) {
    // Report crossings in terms of lines rather than raw segment indices.
    if (e.kind() == ErrorKind::Input) {
      for (std::size_t i = 0; i < segments.size(); ++i)
        for (std::size_t j = i + 1; j < segments.size(); ++j)
          if (geom::segments_cross(p.vertices[segments[i].a], p.vertices[segments[i].b], p.vertices[segments[j].a],
                                   p.vertices[segments[j].b])) {
            const auto owner = line_membership(p);
            throw Error(ErrorKind::Input, "stitching lines " + std::to_string(owner[segments[i].a]) + " and " +
                                              std::to_string(owner[segments[j].a]) + " cross");
          }
    }
    throw;
  }

  const std::vector<Vec2> stitch_points(p.vertices.begin(), p.vertices.end());
  const std::vector<Vec2> pleats = sample_pleat_nodes(input);
  for (const Vec2& q : pleats) {
    for (int v = 0; v < stitch_count; ++v)
      if (p.vertices[v] == q) throw Error(ErrorKind::Input, "pleat node coincides with stitching point " + std::to_string(v));
    const int id = p.vertex_count();
    for (int nb : local_delaunay_neighbors(stitch_points, q)) edges.emplace(nb, id);
    p.vertices.push_back(q);
  }
  for (const Edge& e : pleat_triangulation(pleats)) edges.emplace(e.a + stitch_count, e.b + stitch_count);

  p.edges.assign(edges.begin(), edges.end());
  validate(p);
  return p;
}

SmockingPattern insert_pleat_nodes(const SmockingPattern& p, std::span<const Vec2> positions) {
  SmockingPattern out = p;
  if (positions.empty()) return out;
  const auto [lo, hi] = bounds(p.vertices);
  const double scale = std::max(1e-300, (hi - lo).norm());
  std::set<Edge> edges(p.edges.begin(), p.edges.end());
  for (const Vec2& q : positions) {
    if (!q.allFinite() || q.x() < lo.x() || q.y() < lo.y() || q.x() > hi.x() || q.y() > hi.y())
      throw Error(ErrorKind::Input, "inserted pleat node lies outside the pattern");
    for (const Vec2& v : out.vertices)
      if ((v - q).norm() <= 1e-9 * scale) throw Error(ErrorKind::Input, "inserted pleat node coincides with a vertex");
    const int id = out.vertex_count();
    for (int nb : local_delaunay_neighbors(p.vertices, q)) edges.emplace(nb, id);
    out.vertices.push_back(q);
  }
  out.edges.assign(edges.begin(), edges.end());
  return out;
}

}  // namespace smocklab
