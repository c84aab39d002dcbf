#include "smocklab/delaunay.hpp"
#include "smocklab/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace smocklab;
using geom::delaunay;

namespace {

// Reference triangulation by exhaustive empty-circle test; valid for points in
// general position (no four cocircular, no three collinear).
std::set<Edge> brute_force_delaunay_edges(const std::vector<Vec2>& pts) {
  const int n = static_cast<int>(pts.size());
  std::set<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        Vec2 a = pts[i], b = pts[j], c = pts[k];
        const double orient = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
        if (std::abs(orient) < 1e-12) continue;
        if (orient < 0) std::swap(b, c);
        bool empty = true;
        for (int m = 0; m < n && empty; ++m) {
          if (m == i || m == j || m == k) continue;
          const Vec2 d = pts[m];
          const double adx = a.x() - d.x(), ady = a.y() - d.y();
          const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
          const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
          const double det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                             (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                             (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
          if (det > 0) empty = false;
        }
        if (empty) {
          edges.emplace(i, j);
          edges.emplace(j, k);
          edges.emplace(i, k);
        }
      }
  return edges;
}

}  // namespace

TEST_CASE("exact predicates") {
  CHECK(geom::orient2d({0, 0}, {1, 0}, {0, 1}) == 1);
  CHECK(geom::orient2d({0, 0}, {0, 1}, {1, 0}) == -1);
  CHECK(geom::orient2d({0, 0}, {1, 1}, {2, 2}) == 0);
  // Nearly collinear points that double arithmetic gets wrong without care.
  CHECK(geom::orient2d({0.5, 0.5}, {12.0, 12.0}, {24.0, 24.0}) == 0);
  CHECK(geom::orient2d({0.1, 0.1}, {0.2, 0.2}, {0.30000000000000004, 0.3}) == -1);

  CHECK(geom::incircle({0, 0}, {1, 0}, {0, 1}, {0.5, 0.5}) == 1);
  CHECK(geom::incircle({0, 0}, {1, 0}, {0, 1}, {1, 1}) == 0);
  CHECK(geom::incircle({0, 0}, {1, 0}, {0, 1}, {2, 2}) == -1);

  CHECK(geom::segments_cross({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  CHECK_FALSE(geom::segments_cross({0, 0}, {1, 1}, {1, 1}, {2, 0}));
  CHECK_FALSE(geom::segments_cross({0, 0}, {1, 0}, {2, 0}, {3, 0}));
}

TEST_CASE("matches the exhaustive empty-circle triangulation") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3 + trial % 8;
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng));
    const auto tri = delaunay(pts);
    const auto got = tri.edges();
    const std::set<Edge> mine(got.begin(), got.end());
    CHECK(mine == brute_force_delaunay_edges(pts));
    for (const auto& t : tri.triangles) CHECK(geom::orient2d(pts[t[0]], pts[t[1]], pts[t[2]]) == 1);
  }
}

TEST_CASE("square with cocircular corners triangulates into two triangles") {
  const std::vector<Vec2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto tri = delaunay(pts);
  CHECK(tri.triangles.size() == 2);
  CHECK(tri.edges().size() == 5);
}

TEST_CASE("constraints are honoured") {
  // Without the constraint the short diagonal (1,3) would be chosen.
  const std::vector<Vec2> pts = {{0, 0}, {1, -0.3}, {2, 0}, {1, 0.3}};
  const auto free = delaunay(pts).edges();
  CHECK(std::find(free.begin(), free.end(), Edge(1, 3)) != free.end());
  const std::vector<Edge> forced = {Edge(0, 2)};
  const auto constrained = delaunay(pts, forced).edges();
  CHECK(std::find(constrained.begin(), constrained.end(), Edge(0, 2)) != constrained.end());
  CHECK(std::find(constrained.begin(), constrained.end(), Edge(1, 3)) == constrained.end());
}

TEST_CASE("degenerate input") {
  const std::vector<Vec2> line = {{0, 0}, {1, 0}, {2, 0}};
  CHECK_THROWS_AS(delaunay(line), Error);
  const std::vector<Vec2> dup = {{0, 0}, {1, 0}, {0, 0}, {0, 1}};
  CHECK_THROWS_AS(delaunay(dup), Error);
  const std::vector<Vec2> pts = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const std::vector<Edge> crossing = {Edge(0, 2), Edge(1, 3)};
  CHECK_THROWS_AS(delaunay(pts, crossing), Error);
}
