#include "smocklab/design.hpp"
#include "smocklab/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace smocklab;

namespace {

PipelineParams fast_params() {
  PipelineParams params;
  params.subdivision = 2;
  return params;
}

}  // namespace

TEST_CASE("stitched fine vertices coincide and merge away") {
  for (const char* name : {"box", "braid", "arrow"}) {
    CAPTURE(name);
    const auto p = testing::load(name);
    const auto d = full_pipeline(p, fast_params());
    REQUIRE(d.completed == Stage::Arap);
    const auto groups = stitched_groups(d.fine, p.lines);
    REQUIRE(groups.size() == p.lines.size());
    std::size_t collapsed = 0;
    for (const auto& g : groups) {
      collapsed += g.size() - 1;
      for (int v : g) CHECK(d.fine_positions[v] == d.fine_positions[g.front()]);
    }
    CHECK(d.merged.vertices.size() == d.fine_positions.size() - collapsed);
    CHECK(d.height_field.size() == d.fine_positions.size());
    for (const auto& v : d.fine_positions) CHECK(v.allFinite());
  }
}

TEST_CASE("coarse vertices land on their smocked-graph node") {
  const auto p = testing::load("box");
  const auto d = full_pipeline(p, fast_params());
  const auto nodes = d.embedding.node_positions();
  for (int v = 0; v < p.vertex_count(); ++v)
    CHECK(d.fine_positions[d.fine.coarse_to_fine[v]] == nodes[d.graph.vertex_to_node[v]]);
}

TEST_CASE("stopping early and resuming reproduces the full run") {
  const auto p = testing::load("braid");
  const auto params = fast_params();
  const auto full = full_pipeline(p, params);

  const auto u = full_pipeline(p, params, Stage::Underlay);
  CHECK(u.completed == Stage::Underlay);
  CHECK(u.fine_positions.empty());
  const auto seed_u = parse_stage_seed(stage_json(u));
  const auto pl = full_pipeline(p, params, Stage::Pleat, seed_u);
  CHECK(pl.completed == Stage::Pleat);
  CHECK(pl.embedding.underlay.status == "resumed");
  CHECK(pl.embedding.pleat_xyz == full.embedding.pleat_xyz);

  const auto resumed = full_pipeline(p, params, Stage::Arap, parse_stage_seed(stage_json(pl)));
  CHECK(resumed.fine_positions == full.fine_positions);
  CHECK(resumed.merged.vertices == full.merged.vertices);
}

TEST_CASE("height map is relative to the stitched points") {
  const auto p = testing::load("box");
  const auto d = full_pipeline(p, fast_params());
  double mean = 0.0;
  int count = 0;
  for (const auto& g : stitched_groups(d.fine, p.lines))
    for (int v : g) {
      mean += d.height_field[v];
      ++count;
    }
  CHECK(std::abs(mean / count) < 1e-12);
  const double top = *std::max_element(d.height_field.begin(), d.height_field.end());
  CHECK(top > 0.1);
}

TEST_CASE("pipeline errors are tagged with their stage") {
  GridSpec spec;
  spec.cols = 2;
  spec.rows = 2;
  const auto empty = build_grid(spec);
  try {
    full_pipeline(empty, fast_params());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
    CHECK(e.where() == "extract");
  }

  const auto p = testing::load("box");
  StageSeed seed;
  seed.underlay_xy = Eigen::MatrixX2d::Zero(1, 2);
  try {
    full_pipeline(p, fast_params(), Stage::Arap, seed);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.where() == "underlay");
  }

  seed = {};
  seed.pleat_xyz = Eigen::MatrixX3d::Zero(1, 3);
  try {
    full_pipeline(p, fast_params(), Stage::Arap, seed);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.where() == "pleat");
  }
}

TEST_CASE("stage names") {
  for (Stage s : {Stage::Underlay, Stage::Pleat, Stage::Arap}) CHECK(parse_stage(to_string(s)) == s);
  CHECK_THROWS_AS(parse_stage("sew"), Error);
}
