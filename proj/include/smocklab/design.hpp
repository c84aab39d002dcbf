#pragma once

#include "smocklab/arap.hpp"
#include "smocklab/embedding.hpp"
#include "smocklab/pattern.hpp"
#include "smocklab/smocked_graph.hpp"

#include <optional>
#include <string>
#include <vector>

namespace smocklab {

struct PipelineParams {
  EmbedParams embed;
  ArapConfig arap;
  int subdivision = kDefaultSubdivision;
};

enum class Stage { Underlay, Pleat, Arap };

const char* to_string(Stage stage);
Stage parse_stage(const std::string& name);

/// Precomputed stage outputs to resume from.
struct StageSeed {
  std::optional<Eigen::MatrixX2d> underlay_xy;
  std::optional<Eigen::MatrixX3d> pleat_xyz;
};

struct SmockedDesign {
  Stage completed = Stage::Arap;
  SmockedGraph graph;
  EmbeddingSolution embedding;
  FinePattern fine;
  std::vector<Vec3> fine_positions;
  MergedMesh merged;
  ArapResult arap;
  std::vector<double> height_field;  // per fine vertex
  std::vector<std::string> warnings;

  const std::vector<std::array<int, 3>>& faces() const { return fine.faces; }
  bool converged() const;
};

/// Fine vertex ids of each stitching line.
std::vector<std::vector<int>> stitched_groups(const FinePattern& fine, const std::vector<StitchingLine>& lines);

/// extract -> underlay -> pleats -> refine -> pinned ARAP -> merge, stopping
/// after `stop`. Errors carry the failing stage in Error::where().
SmockedDesign full_pipeline(const SmockingPattern& p, const PipelineParams& params, Stage stop = Stage::Arap,
                            const StageSeed& seed = {});

/// Height of every fine vertex relative to the mean height of stitched vertices.
std::vector<double> height_map(const SmockedDesign& design, const std::vector<StitchingLine>& lines);

}  // namespace smocklab
