#include "smocklab/delaunay.hpp"
#include "smocklab/design.hpp"
#include "smocklab/error.hpp"
#include "smocklab/gridfree.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace smocklab;

namespace {

std::vector<Edge> class_edges(const SmockedGraph& s, EdgeClass c) {
  std::vector<Edge> out;
  for (const auto& e : s.edges)
    if (e.kind == c) out.emplace_back(e.a, e.b);
  return out;
}

}  // namespace

TEST_CASE("local Delaunay neighbours agree with an empty-circle search") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 3 + trial % 8;
    std::vector<Vec2> pts;
    for (int k = 0; k < n; ++k) pts.emplace_back(u(rng), u(rng));
    const Vec2 q(u(rng), u(rng));
    const auto got = local_delaunay_neighbors(pts, q);
    CHECK(std::set<int>(got.begin(), got.end()) == oracle::delaunay_neighbors(pts, q));
  }
}

TEST_CASE("two parallel lines") {
  GridFreeInput in;
  in.lines = {{Vec2(0, 0), Vec2(0, 1)}, {Vec2(1, 0), Vec2(1, 1)}};
  const auto p = build_gridfree(in);
  CHECK(p.grid.kind == GridKind::Explicit);
  REQUIRE(p.vertex_count() == 6);
  REQUIRE(p.lines.size() == 2);

  std::set<Edge> among_stitches;
  std::vector<int> degree(p.vertex_count(), 0);
  for (const Edge& e : p.edges) {
    ++degree[e.a];
    ++degree[e.b];
    if (e.a < 4 && e.b < 4) among_stitches.insert(e);
  }
  // Square sides plus exactly one of the two diagonals.
  for (Edge side : {Edge(0, 1), Edge(2, 3), Edge(0, 2), Edge(1, 3)}) CHECK(among_stitches.count(side) == 1);
  CHECK(among_stitches.size() == 5);
  CHECK(among_stitches.count(Edge(0, 3)) + among_stitches.count(Edge(1, 2)) == 1);
  CHECK(degree[4] >= 2);
  CHECK(degree[5] >= 2);

  const auto s = extract(p);
  CHECK(s.underlay_count() == 2);
  CHECK(s.pleat_count() == 2);
}

TEST_CASE("no sampled pleat nodes leaves no pleat edges") {
  GridFreeInput in;
  in.lines = {{Vec2(0, 0), Vec2(1, 0)}, {Vec2(0, 2), Vec2(0.5, 3)}, {Vec2(2, 1), Vec2(3, 2)}};
  in.sampling.kind = PleatSampling::Kind::Explicit;
  const auto p = build_gridfree(in);
  CHECK(p.vertex_count() == 6);
  for (const Edge& e : p.edges) CHECK(e.b < 6);
  const auto s = extract(p);
  CHECK(class_edges(s, EdgeClass::Pleat).empty());
}

TEST_CASE("grid-free errors") {
  GridFreeInput crossing;
  crossing.lines = {{Vec2(0, 0), Vec2(2, 2)}, {Vec2(0, 2), Vec2(2, 0)}};
  CHECK_THROWS_WITH_AS(build_gridfree(crossing), "stitching lines 0 and 1 cross", Error);

  GridFreeInput collinear;
  collinear.lines = {{Vec2(0, 0), Vec2(1, 0)}, {Vec2(2, 0), Vec2(3, 0)}};
  collinear.sampling.kind = PleatSampling::Kind::Explicit;
  try {
    build_gridfree(collinear);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }

  GridFreeInput single;
  single.lines = {{Vec2(0, 0), Vec2(1, 0)}};
  CHECK_THROWS_AS(build_gridfree(single), Error);
}

TEST_CASE("Poisson sampling is deterministic and respects the radius") {
  GridFreeInput in;
  in.lines = {{Vec2(0, 0), Vec2(0, 3)}, {Vec2(3, 0), Vec2(3, 3)}};
  in.sampling.kind = PleatSampling::Kind::Poisson;
  in.sampling.radius = 0.7;
  const auto a = sample_pleat_nodes(in);
  CHECK(a == sample_pleat_nodes(in));
  CHECK(!a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) CHECK((a[i] - a[j]).norm() >= 0.7);
    for (const auto& line : in.lines)
      for (const Vec2& v : line) CHECK((a[i] - v).norm() >= 0.7);
  }
}

TEST_CASE("mixed-scale cross pattern runs end to end") {
  const auto p = testing::load("cross");
  const auto s = extract(p);
  CHECK(is_connected(s.underlay_count(), class_edges(s, EdgeClass::Underlay)));
  PipelineParams params;
  params.subdivision = 2;
  const auto d = full_pipeline(p, params);
  CHECK(d.completed == Stage::Arap);
  for (const auto& v : d.fine_positions) CHECK(v.allFinite());
}

TEST_CASE("inserting pleat nodes") {
  const auto basket = testing::load("basket");
  CHECK(insert_pleat_nodes(basket, {}).edges == basket.edges);

  const std::vector<Vec2> centre = {Vec2(0.5, 1.5)};
  const auto q = insert_pleat_nodes(basket, centre);
  REQUIRE(q.vertex_count() == basket.vertex_count() + 1);
  int degree = 0;
  for (const Edge& e : q.edges) degree += (e.a == basket.vertex_count() || e.b == basket.vertex_count());
  CHECK(degree >= 3);

  // Midpoints of every stitching line: each new node reaches >= 2 underlay nodes.
  std::vector<Vec2> mids;
  for (const auto& l : basket.lines) mids.push_back(0.5 * (basket.vertices[l.vertex_ids.front()] + basket.vertices[l.vertex_ids.back()]));
  const auto withmids = insert_pleat_nodes(basket, mids);
  const auto s = extract(withmids);
  for (std::size_t k = 0; k < mids.size(); ++k) {
    const int node = s.vertex_to_node[basket.vertex_count() + static_cast<int>(k)];
    std::set<int> underlay;
    for (const auto& e : s.edges) {
      if (e.a == node && e.b < s.underlay_count()) underlay.insert(e.b);
      if (e.b == node && e.a < s.underlay_count()) underlay.insert(e.a);
    }
    CHECK(underlay.size() >= 2);
  }

  CHECK_THROWS_AS(insert_pleat_nodes(basket, std::vector<Vec2>{basket.vertices[0]}), Error);
  CHECK_THROWS_AS(insert_pleat_nodes(basket, std::vector<Vec2>{Vec2(-5, -5)}), Error);
}
