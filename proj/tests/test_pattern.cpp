#include "smocklab/error.hpp"
#include "smocklab/pattern.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <map>
#include <set>

using namespace smocklab;

namespace {

SmockingPattern square_grid(int cols, int rows) {
  GridSpec spec;
  spec.cols = cols;
  spec.rows = rows;
  return build_grid(spec);
}

StitchingLine line(std::initializer_list<int> ids) { return StitchingLine{std::vector<int>(ids)}; }

// Boundary edges of a triangle mesh as point pairs, each sorted lexicographically.
std::set<std::pair<std::pair<double, double>, std::pair<double, double>>> boundary_points(const FinePattern& f) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : f.faces)
    for (int k = 0; k < 3; ++k) ++count[std::minmax(t[k], t[(k + 1) % 3])];
  std::set<std::pair<std::pair<double, double>, std::pair<double, double>>> out;
  for (const auto& [e, c] : count) {
    if (c != 1) continue;
    out.insert({{f.vertices[e.first].x(), f.vertices[e.first].y()}, {f.vertices[e.second].x(), f.vertices[e.second].y()}});
  }
  return out;
}

}  // namespace

TEST_CASE("square grid counts") {
  const auto p = square_grid(1, 1);
  CHECK(p.vertex_count() == 4);
  CHECK(p.edges.size() == 6);

  for (auto [c, r] : {std::pair{3, 2}, std::pair{5, 4}, std::pair{1, 7}}) {
    const auto g = square_grid(c, r);
    CHECK(g.vertex_count() == (c + 1) * (r + 1));
    CHECK(g.edges.size() == static_cast<std::size_t>(c * (r + 1) + r * (c + 1) + 2 * c * r));
    CHECK(is_connected(g.vertex_count(), g.edges));
  }
}

TEST_CASE("hexagonal grid has hexagon sides only") {
  GridSpec spec;
  spec.kind = GridKind::Hexagonal;
  spec.cols = 4;
  spec.rows = 3;
  const auto p = build_grid(spec);
  CHECK(p.vertex_count() == 20);
  CHECK(is_connected(p.vertex_count(), p.edges));
  std::vector<int> degree(p.vertex_count(), 0);
  for (const auto& e : p.edges) {
    ++degree[e.a];
    ++degree[e.b];
    CHECK((p.vertices[e.a] - p.vertices[e.b]).norm() == doctest::Approx(spec.spacing));
  }
  CHECK(*std::max_element(degree.begin(), degree.end()) <= 3);
}

TEST_CASE("radial deformation keeps connectivity") {
  auto flat = square_grid(4, 2);
  auto bent = deform(flat, RadialDeform{2.0, std::numbers::pi});
  CHECK(bent.edges == flat.edges);
  // Column 0 sits at angle 0 and the last column at the full span.
  CHECK(bent.vertices[0].x() == doctest::Approx(2.0));
  CHECK(bent.vertices[0].y() == doctest::Approx(0.0));
  CHECK(bent.vertices[4].x() == doctest::Approx(-2.0));
  CHECK(bent.vertices[4].y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((bent.vertices[grid_index(bent.grid, 2, 2)] - Vec2(0.0, 4.0)).norm() < 1e-12);
}

TEST_CASE("warp keeps integer parameters on the deformed surface") {
  GridSpec spec;
  spec.cols = 3;
  spec.rows = 3;
  spec.deformation = WarpField{0.1, 0.05, 4.0};
  const auto p = build_grid(spec);
  for (int v = 0; v < p.vertex_count(); ++v) {
    const auto [i, j] = grid_coords(spec, v);
    CHECK((p.vertices[v] - grid_point(spec, i, j)).norm() == 0.0);
  }
  spec.deformation = WarpField{1.0, 0.0, 4.0};
  CHECK_THROWS_AS(validate_spec(spec), Error);
}

TEST_CASE("validation rejects malformed lines") {
  auto p = square_grid(2, 2);
  p.lines = {line({0, 1}), line({1, 2})};
  CHECK_THROWS_AS(validate(p), Error);
  p.lines = {line({0})};
  CHECK_THROWS_AS(validate(p), Error);
  p.lines = {line({0, 0})};
  CHECK_THROWS_AS(validate(p), Error);
  p.lines = {line({0, 99})};
  CHECK_THROWS_AS(validate(p), Error);
  p.lines = {line({0, 1}), line({3, 4})};
  CHECK_NOTHROW(validate(p));
}

TEST_CASE("add and delete lines are pure") {
  const auto base = square_grid(2, 2);
  const auto with = add_line(base, line({0, 4}));
  CHECK(base.lines.empty());
  CHECK(with.lines.size() == 1);
  try {
    add_line(with, line({4, 8}));
    FAIL("expected a conflict");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Conflict);
  }
  const auto without = delete_line(with, 0);
  CHECK(without.lines.empty());
  CHECK(with.lines.size() == 1);
  CHECK_THROWS_AS(delete_line(with, 3), Error);
}

TEST_CASE("tiling the arrow unit gives 24 lines") {
  const auto p = testing::load("arrow");
  CHECK(p.lines.size() == 24);
  CHECK_NOTHROW(validate(p));
  // Every tile is a translate of the first one.
  const Vec2 t(6.0, 0.0);
  for (int k = 0; k < 4; ++k) {
    const Vec2 a = p.vertices[p.lines[k].vertex_ids[0]];
    const Vec2 b = p.vertices[p.lines[k + 4].vertex_ids[0]];
    CHECK((b - a - t).norm() < 1e-12);
  }
}

TEST_CASE("tiling conflicts are reported") {
  auto unit = square_grid(2, 1);
  unit.lines = {line({0, 2})};
  unit.unit_cell = UnitCell{0, 0, 2, 1};
  CHECK_THROWS_AS(tile_unit(unit, 2, 1), Error);
}

TEST_CASE("margins shift lines and unit cell") {
  auto p = square_grid(1, 1);
  p.lines = {line({0, 1})};
  p.unit_cell = UnitCell{0, 0, 1, 1};
  const auto q = add_margin(p, Margins::uniform(2));
  CHECK(q.grid.cols == 5);
  CHECK(q.grid.rows == 5);
  CHECK(q.vertices[q.lines[0].vertex_ids[0]].isApprox(Vec2(2.0, 2.0)));
  CHECK(q.unit_cell->i0 == 2);
}

TEST_CASE("combine places the second pattern after a gap") {
  auto a = square_grid(2, 1);
  a.lines = {line({0, 1})};
  auto b = square_grid(1, 1);
  b.lines = {line({0, 2})};
  const auto c = combine(a, b, Axis::X, 1);
  CHECK(c.grid.cols == 4);
  CHECK(c.lines.size() == 2);
  CHECK(c.vertices[c.lines[1].vertex_ids[0]].isApprox(Vec2(3.0, 0.0)));
  CHECK(c.vertices[c.lines[1].vertex_ids[1]].isApprox(Vec2(3.0, 1.0)));
}

TEST_CASE("refinement keeps coarse vertices and the boundary") {
  auto p = square_grid(3, 2);
  for (int s : {1, 2, 3}) {
    const auto fine = refine(p, s);
    CHECK(fine.vertex_count() == (3 * s + 1) * (2 * s + 1));
    CHECK(fine.faces.size() == static_cast<std::size_t>(2 * 3 * s * 2 * s));
    for (int v = 0; v < p.vertex_count(); ++v) CHECK((fine.vertices[fine.coarse_to_fine[v]] - p.vertices[v]).norm() == 0.0);

    // Boundary as a point set: every fine boundary vertex lies on the coarse boundary rectangle.
    for (const auto& [a, b] : boundary_points(fine)) {
      for (const auto& q : {a, b}) {
        const bool on = q.first == 0.0 || q.first == 3.0 || q.second == 0.0 || q.second == 2.0;
        CHECK(on);
      }
    }
  }
  CHECK_THROWS_AS(refine(p, 0), Error);
}

TEST_CASE("refinement of inserted vertices and hexagonal grids") {
  const auto basket = testing::load("basket");
  const auto fine = refine(basket, 2);
  for (int v = 0; v < basket.vertex_count(); ++v)
    CHECK((fine.vertices[fine.coarse_to_fine[v]] - basket.vertices[v]).norm() < 1e-12);

  GridSpec spec;
  spec.kind = GridKind::Hexagonal;
  spec.cols = 4;
  spec.rows = 2;
  const auto hex = build_grid(spec);
  const auto hf = refine(hex, 2);
  CHECK(hf.vertex_count() > hex.vertex_count());
  for (int v = 0; v < hex.vertex_count(); ++v)
    CHECK((hf.vertices[hf.coarse_to_fine[v]] - hex.vertices[v]).norm() < 1e-12);
}
