#pragma once

#include "smocklab/design.hpp"
#include "smocklab/embedding.hpp"
#include "smocklab/pattern.hpp"
#include "smocklab/smocked_graph.hpp"

#include <string>
#include <vector>

namespace smocklab {

enum class ConstraintClass { Well, Under, Over, Inconclusive };

const char* to_string(ConstraintClass c);

struct ConstraintReport {
  ConstraintClass classification = ConstraintClass::Well;
  std::vector<PrunedPair> slack_pairs;  // underlay node pairs dropped by the triangle inequality
  double residual = 0.0;                // underlay energy over the active pairs
  int flex_dofs = 0;                    // infinitesimal motions beyond planar rigid motion
  std::string dof_note;
  bool converged = true;
};

/// Planar solve over the active underlay edges, then:
///   over  if the residual exceeds 1e-8,
///   under if the active constraints leave a non-rigid infinitesimal motion,
///   well  otherwise.
ConstraintReport classify_pattern(const SmockingPattern& p, const EmbedParams& params);

/// Squared edge residuals of the embedding, each added to both endpoint nodes
/// and spread evenly over the pattern vertices of the node.
std::vector<double> energy_distribution(const SmockingPattern& p, const SmockedGraph& s,
                                        const EmbeddingSolution& solution);

struct Shrinkage {
  double ratio_x = 1.0;
  double ratio_y = 1.0;
  double area_ratio = 1.0;
};

/// Bounding-box extents of the design, rigidly aligned to the flat fabric,
/// relative to the flat fabric's extents.
Shrinkage shrinkage(const SmockingPattern& p, const SmockedDesign& design);

}  // namespace smocklab
