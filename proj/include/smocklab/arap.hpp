#pragma once

#include "smocklab/pattern.hpp"

#include <array>
#include <map>
#include <vector>

namespace smocklab {

enum class WeightScheme { Cotangent, Uniform };

struct ArapConfig {
  int max_outer_iters = 300;
  double tol = 1e-9;  // relative energy change
  WeightScheme weight_scheme = WeightScheme::Cotangent;
  std::vector<double> epsilon_schedule;  // baseline only; empty means the default schedule
  int baseline_iters_per_step = 30;
};

struct ArapResult {
  std::vector<Vec3> positions;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_trace;  // energy after every local-global sweep, starting with the initial guess
  int degenerate_triangles = 0;
};

/// Symmetric per-edge weights of the rest mesh. Triangles with vanishing area
/// contribute a uniform weight instead of cotangents.
struct EdgeWeights {
  std::map<std::pair<int, int>, double> w;  // (i, j) with i < j
  int degenerate_triangles = 0;
};

EdgeWeights arap_weights(const std::vector<Vec3>& rest, const std::vector<std::array<int, 3>>& faces,
                         WeightScheme scheme);

/// ARAP energy with per-vertex rotations fitted to `x`.
double arap_energy(const std::vector<Vec3>& rest, const EdgeWeights& weights, const std::vector<Vec3>& x);

/// Pins map fine vertex ids to 3D targets. Without pins, vertex 0 stays at its
/// rest position.
ArapResult arap_solve(const std::vector<Vec3>& rest, const std::vector<std::array<int, 3>>& faces,
                      const std::map<int, Vec3>& pins, const ArapConfig& cfg);

/// Pins given per coarse vertex, mapped through coarse_to_fine.
ArapResult arap_pinned(const FinePattern& fine, const std::map<int, Vec3>& coarse_pins, const ArapConfig& cfg);

/// Schedule of stitched-pair distances: half the mean initial pair length,
/// halved three more times, then 0.
std::vector<double> default_epsilon_schedule(const FinePattern& fine, const std::vector<StitchingLine>& lines);

/// Plain ARAP that sews each stitching line through pairwise distance
/// constraints (linearised), following the epsilon schedule.
ArapResult arap_stitch_baseline(const FinePattern& fine, const std::vector<StitchingLine>& lines,
                                const ArapConfig& cfg);

struct MergedMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<int> fine_to_merged;
};

/// Collapses each stitched group (fine vertex ids) onto its smallest id and
/// drops faces that become degenerate.
MergedMesh merge_stitched(const std::vector<Vec3>& positions, const std::vector<std::array<int, 3>>& faces,
                          const std::vector<std::vector<int>>& groups, double tolerance = 1e-6);

}  // namespace smocklab
