#pragma once

#include "smocklab/smocked_graph.hpp"
#include "smocklab/solver.hpp"

#include <Eigen/Core>

#include <span>
#include <utility>
#include <vector>

namespace smocklab {

struct EmbedParams {
  double w_embed = 1e-3;
  double w_height = 1e-3;
  int max_iters = 1000;
  double grad_tol = 1e-10;
  double energy_tol = 1e-8;
  double pleat_init_height = 1.0;
};

struct Spring {
  int i = 0;
  int j = 0;
  double rest = 0.0;
};

/// Point-set energy shared by every embedding stage:
///   sum (|xi - xj| - d)^2  -  w_spread * sum_{ordered pairs} |xi - xj|  +  w_var * Var[z]
/// Coordinates of all points live in `full`; entries with mask false are held
/// fixed and the solver only sees the free ones.
class EmbeddingObjective : public Objective {
 public:
  EmbeddingObjective(int points, int dims, Eigen::VectorXd full, std::vector<bool> free_mask);

  void add_spring(int i, int j, double rest) { springs_.push_back({i, j, rest}); }
  /// Spread term over unordered pairs with at least one flagged point.
  void set_spread(double weight, std::vector<bool> flagged);
  /// Variance of the last coordinate over `nodes`.
  void set_height_variance(double weight, std::vector<int> nodes);

  int dim() const override { return free_count_; }
  double value(const Eigen::VectorXd& x) const override;
  double gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const override;
  SparseMatrix projected_hessian(const Eigen::VectorXd& x) const override;
  bool nonnegative() const override { return spread_weight_ == 0.0; }

  Eigen::VectorXd pack(const Eigen::VectorXd& full) const;
  Eigen::VectorXd unpack(const Eigen::VectorXd& x) const;
  double spring_energy(const Eigen::VectorXd& full) const;

 private:
  double eval(const Eigen::VectorXd& full, Eigen::VectorXd* grad_full) const;

  int points_;
  int dims_;
  Eigen::VectorXd base_;
  std::vector<int> slot_;  // full coordinate -> free index or -1
  int free_count_ = 0;
  std::vector<Spring> springs_;
  double spread_weight_ = 0.0;
  std::vector<bool> spread_flag_;
  double var_weight_ = 0.0;
  std::vector<int> var_nodes_;
};

struct StageReport {
  double energy = 0.0;
  int iterations = 0;
  bool converged = true;
  std::string status;
  double seconds = 0.0;
  std::vector<TraceRecord> trace;
};

struct UnderlayEmbedding {
  Eigen::MatrixX2d xy;  // one row per underlay node
  StageReport report;
};

struct PleatEmbedding {
  Eigen::MatrixX3d xyz;  // one row per pleat node
  double spring_energy = 0.0;
  StageReport report;  // report.energy includes the regularizers
};

struct EmbeddingSolution {
  Eigen::MatrixX2d underlay_xy;
  Eigen::MatrixX3d pleat_xyz;
  double underlay_energy = 0.0;
  double pleat_energy = 0.0;         // full pleat objective
  double pleat_spring_energy = 0.0;  // spring part only
  StageReport underlay;
  StageReport pleat;

  bool converged() const { return underlay.converged && pleat.converged; }
  /// Position of every smocked-graph node (underlay rows first, z = 0).
  std::vector<Vec3> node_positions() const;
};

/// Planar solve over underlay edges (or the given subset of edge ids). Node 0
/// sits at the origin and node 1 on the +x axis.
UnderlayEmbedding embed_underlay(const SmockedGraph& s, const EmbedParams& params,
                                 std::span<const int> edge_ids = {});

/// 3D pleat solve with the underlay pinned at height 0. `init` overrides the
/// default start (rest positions mapped through the best similarity from the
/// rest underlay to its embedding, lifted to pleat_init_height).
PleatEmbedding embed_pleats(const SmockedGraph& s, const Eigen::MatrixX2d& underlay_xy, const EmbedParams& params,
                            const Eigen::MatrixX3d* init = nullptr);

EmbeddingSolution embed_two_stage(const SmockedGraph& s, const EmbedParams& params);

/// Joint solve over all nodes (underlay held in the plane). Reported in
/// `underlay` (combined objective) with pleat left empty.
EmbeddingSolution embed_simultaneous(const SmockedGraph& s, const EmbedParams& params);

/// Sum of squared edge residuals over the given edges at the given positions.
double edge_residual_energy(const SmockedGraph& s, std::span<const Vec3> positions, std::span<const int> edge_ids);

struct PrunedPair {
  int i = 0;
  int k = 0;
  int via = -1;  // intermediate j achieving the smallest detour
  double slack = 0.0;
};

struct PruneResult {
  std::vector<std::pair<int, int>> active;
  std::vector<PrunedPair> pruned;
};

/// Drops a candidate pair (i, k) when some j gives d_ij + d_jk <= d_ik; such a
/// bound can never be violated once the other two hold.
PruneResult prune_constraints(const Eigen::MatrixXd& bounds, std::span<const std::pair<int, int>> pairs);

}  // namespace smocklab
