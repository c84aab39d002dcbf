#include "smocklab/analysis.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace smocklab {

const char* to_string(ConstraintClass c) {
  switch (c) {
    case ConstraintClass::Well: return "well";
    case ConstraintClass::Under: return "under";
    case ConstraintClass::Over: return "over";
    case ConstraintClass::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

ConstraintReport classify_pattern(const SmockingPattern& p, const EmbedParams& params) {
  const SmockedGraph s = extract(p);
  const int nu = s.underlay_count();
  Eigen::MatrixXd bounds = Eigen::MatrixXd::Zero(nu, nu);
  for (int i = 0; i < nu; ++i)
    for (int j = i + 1; j < nu; ++j) bounds(i, j) = bounds(j, i) = distance_bound(p, s, i, j);

  const auto underlay = s.underlay_edges();
  std::vector<std::pair<int, int>> pairs;
  for (int e : underlay) pairs.emplace_back(s.edges[e].a, s.edges[e].b);
  const PruneResult pruned = prune_constraints(bounds, pairs);

  std::vector<int> active;
  for (int e : underlay) {
    const std::pair<int, int> key{s.edges[e].a, s.edges[e].b};
    if (std::find(pruned.active.begin(), pruned.active.end(), key) != pruned.active.end()) active.push_back(e);
  }

  ConstraintReport report;
  report.slack_pairs = pruned.pruned;
  if (nu < 2) {
    report.dof_note = "single underlay node";
    return report;
  }
  if (active.empty()) {
    report.classification = ConstraintClass::Under;
    report.flex_dofs = 2 * nu - 3;
    report.dof_note = "no active underlay constraints";
    return report;
  }

  const UnderlayEmbedding emb = embed_underlay(s, params, active);
  report.residual = emb.report.energy;
  report.converged = emb.report.converged;

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(active.size()), 2 * nu);
  for (std::size_t r = 0; r < active.size(); ++r) {
    const SmockedEdge& e = s.edges[active[r]];
    Eigen::Vector2d d = emb.xy.row(e.a) - emb.xy.row(e.b);
    const double len = d.norm();
    if (len > 0.0) d /= len;
    J.block<1, 2>(static_cast<Eigen::Index>(r), 2 * e.a) = d.transpose();
    J.block<1, 2>(static_cast<Eigen::Index>(r), 2 * e.b) = -d.transpose();
  }
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv[k] > 1e-6 * top) ++rank;
  report.flex_dofs = std::max(0, 2 * nu - rank - 3);

  if (!report.converged) {
    report.classification = ConstraintClass::Inconclusive;
    report.dof_note = "underlay solve did not converge";
  } else if (report.residual > 1e-8) {
    report.classification = ConstraintClass::Over;
    report.dof_note = "active underlay constraints cannot all be met in the plane";
  } else if (report.flex_dofs > 0) {
    report.classification = ConstraintClass::Under;
    report.dof_note = std::to_string(report.flex_dofs) + " non-rigid planar motion(s) of the underlay";
  } else {
    report.dof_note = "underlay is rigid up to planar motion";
  }
  return report;
}

std::vector<double> energy_distribution(const SmockingPattern& p, const SmockedGraph& s,
                                        const EmbeddingSolution& solution) {
  const auto pos = solution.node_positions();
  std::vector<double> node(s.node_count(), 0.0);
  for (const SmockedEdge& e : s.edges) {
    const double r = (pos[e.a] - pos[e.b]).norm() - e.bound;
    node[e.a] += r * r;
    node[e.b] += r * r;
  }
  std::vector<double> out(p.vertices.size(), 0.0);
  for (int v = 0; v < p.vertex_count(); ++v) {
    const int n = s.vertex_to_node[v];
    const double share = s.is_underlay(n) ? static_cast<double>(p.lines[s.nodes[n].source].vertex_ids.size()) : 1.0;
    out[v] = node[n] / share;
  }
  return out;
}

Shrinkage shrinkage(const SmockingPattern& p, const SmockedDesign& design) {
  if (p.lines.empty() || design.fine_positions.empty()) return {};
  const auto& rest2 = design.fine.vertices;
  const Eigen::Index n = static_cast<Eigen::Index>(rest2.size());
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    src.col(k) = design.fine_positions[k];
    dst.col(k) << rest2[k].x(), rest2[k].y(), 0.0;
  }
  const Eigen::Matrix4d T = Eigen::umeyama(src, dst, false);
  const Eigen::Matrix3Xd aligned = (T.topLeftCorner<3, 3>() * src).colwise() + T.block<3, 1>(0, 3);
  const Eigen::Vector3d ext = aligned.rowwise().maxCoeff() - aligned.rowwise().minCoeff();
  const Eigen::Vector3d rest_ext = dst.rowwise().maxCoeff() - dst.rowwise().minCoeff();
  Shrinkage s;
  s.ratio_x = ext.x() / rest_ext.x();
  s.ratio_y = ext.y() / rest_ext.y();
  s.area_ratio = s.ratio_x * s.ratio_y;
  return s;
}

}  // namespace smocklab
