#include "smocklab/design.hpp"

#include "smocklab/error.hpp"

#include <spdlog/spdlog.h>

namespace smocklab {

namespace {

template <class F>
auto staged(const char* tag, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), e.what(), e.where().empty() ? tag : e.where());
  }
}

}  // namespace

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::Underlay: return "underlay";
    case Stage::Pleat: return "pleat";
    case Stage::Arap: return "arap";
  }
  return "arap";
}

Stage parse_stage(const std::string& name) {
  if (name == "underlay") return Stage::Underlay;
  if (name == "pleat") return Stage::Pleat;
  if (name == "arap") return Stage::Arap;
  throw Error(ErrorKind::Input, "unknown stage '" + name + "'");
}

bool SmockedDesign::converged() const {
  if (!embedding.underlay.converged) return false;
  if (completed != Stage::Underlay && !embedding.pleat.converged) return false;
  return true;
}

std::vector<std::vector<int>> stitched_groups(const FinePattern& fine, const std::vector<StitchingLine>& lines) {
  std::vector<std::vector<int>> groups;
  groups.reserve(lines.size());
  for (const auto& line : lines) {
    std::vector<int> g;
    for (int v : line.vertex_ids) g.push_back(fine.coarse_to_fine.at(v));
    groups.push_back(std::move(g));
  }
  return groups;
}

SmockedDesign full_pipeline(const SmockingPattern& p, const PipelineParams& params, Stage stop,
                            const StageSeed& seed) {
  SmockedDesign d;
  if (p.lines.empty()) throw Error(ErrorKind::Input, "pattern has no stitching lines", "extract");
  d.graph = staged("extract", [&] { return extract(p); });
  d.warnings = d.graph.warnings;

  staged("underlay", [&] {
    if (seed.underlay_xy) {
      if (seed.underlay_xy->rows() != d.graph.underlay_count())
        throw Error(ErrorKind::Input, "resume data has the wrong number of underlay nodes");
      d.embedding.underlay_xy = *seed.underlay_xy;
      std::vector<Vec3> pos;
      for (Eigen::Index i = 0; i < seed.underlay_xy->rows(); ++i)
        pos.emplace_back((*seed.underlay_xy)(i, 0), (*seed.underlay_xy)(i, 1), 0.0);
      const auto ue = d.graph.underlay_edges();
      d.embedding.underlay_energy = edge_residual_energy(d.graph, pos, ue);
      d.embedding.underlay.energy = d.embedding.underlay_energy;
      d.embedding.underlay.status = "resumed";
    } else {
      auto u = embed_underlay(d.graph, params.embed);
      d.embedding.underlay_xy = std::move(u.xy);
      d.embedding.underlay_energy = u.report.energy;
      d.embedding.underlay = std::move(u.report);
    }
    return 0;
  });
  d.completed = Stage::Underlay;
  if (stop == Stage::Underlay) return d;

  staged("pleat", [&] {
    const Eigen::MatrixX3d* init = nullptr;
    if (seed.pleat_xyz) {
      if (seed.pleat_xyz->rows() != d.graph.pleat_count())
        throw Error(ErrorKind::Input, "resume data has the wrong number of pleat nodes");
      init = &*seed.pleat_xyz;
    }
    if (init) {
      // Resuming past the pleat stage keeps the given coordinates as they are.
      d.embedding.pleat_xyz = *init;
      d.embedding.pleat.status = "resumed";
      const auto pos = d.embedding.node_positions();
      const auto pe = d.graph.pleat_edges();
      d.embedding.pleat_spring_energy = edge_residual_energy(d.graph, pos, pe);
      d.embedding.pleat_energy = d.embedding.pleat_spring_energy;
      d.embedding.pleat.energy = d.embedding.pleat_energy;
    } else {
      auto pl = embed_pleats(d.graph, d.embedding.underlay_xy, params.embed);
      d.embedding.pleat_xyz = std::move(pl.xyz);
      d.embedding.pleat_energy = pl.report.energy;
      d.embedding.pleat_spring_energy = pl.spring_energy;
      d.embedding.pleat = std::move(pl.report);
    }
    return 0;
  });
  d.completed = Stage::Pleat;
  if (stop == Stage::Pleat) return d;

  staged("arap", [&] {
    d.fine = refine(p, params.subdivision);
    const auto nodes = d.embedding.node_positions();
    std::map<int, Vec3> pins;
    for (int v = 0; v < p.vertex_count(); ++v) pins[v] = nodes[d.graph.vertex_to_node[v]];
    d.arap = arap_pinned(d.fine, pins, params.arap);
    d.fine_positions = d.arap.positions;
    return 0;
  });
  d.merged = staged("merge", [&] { return merge_stitched(d.fine_positions, d.fine.faces, stitched_groups(d.fine, p.lines)); });
  d.height_field = height_map(d, p.lines);
  d.completed = Stage::Arap;
  return d;
}

std::vector<double> height_map(const SmockedDesign& design, const std::vector<StitchingLine>& lines) {
  std::vector<double> h;
  h.reserve(design.fine_positions.size());
  double base = 0.0;
  int count = 0;
  for (const auto& g : stitched_groups(design.fine, lines)) {
    for (int v : g) {
      base += design.fine_positions[v].z();
      ++count;
    }
  }
  if (count > 0) base /= count;
  for (const Vec3& x : design.fine_positions) h.push_back(x.z() - base);
  return h;
}

}  // namespace smocklab
