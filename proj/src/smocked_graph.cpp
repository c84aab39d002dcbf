#include "smocklab/smocked_graph.hpp"

#include "smocklab/error.hpp"

#include <spdlog/spdlog.h>

#include <limits>
#include <map>

namespace smocklab {

namespace {

const std::vector<int>& points_of(const SmockingPattern& p, const SmockedGraph& s, int node,
                                  std::vector<int>& scratch) {
  const SmockedNode& n = s.nodes[node];
  if (n.kind == VertexClass::Underlay) return p.lines[n.source].vertex_ids;
  scratch.assign(1, n.source);
  return scratch;
}

}  // namespace

Classification classify(const SmockingPattern& p) {
  const auto owner = line_membership(p);
  Classification c;
  c.vertices.reserve(owner.size());
  for (int o : owner) c.vertices.push_back(o >= 0 ? VertexClass::Underlay : VertexClass::Pleat);
  c.edges.reserve(p.edges.size());
  for (const Edge& e : p.edges) {
    const int la = owner[e.a], lb = owner[e.b];
    if (la >= 0 && la == lb)
      c.edges.push_back(EdgeClass::Degenerated);
    else if (la >= 0 && lb >= 0)
      c.edges.push_back(EdgeClass::Underlay);
    else
      c.edges.push_back(EdgeClass::Pleat);
  }
  return c;
}

std::vector<int> SmockedGraph::underlay_edges() const {
  std::vector<int> out;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edges[e].kind == EdgeClass::Underlay) out.push_back(static_cast<int>(e));
  return out;
}

std::vector<int> SmockedGraph::pleat_edges() const {
  std::vector<int> out;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edges[e].kind == EdgeClass::Pleat) out.push_back(static_cast<int>(e));
  return out;
}

double distance_bound(const SmockingPattern& p, const SmockedGraph& s, int a, int b) {
  std::vector<int> sa, sb;
  const auto& pa = points_of(p, s, a, sa);
  const auto& pb = points_of(p, s, b, sb);
  double best = std::numeric_limits<double>::infinity();
  for (int u : pa)
    for (int v : pb) best = std::min(best, (p.vertices[u] - p.vertices[v]).norm());
  return best;
}

Eigen::MatrixXd all_pair_bounds(const SmockingPattern& p, const SmockedGraph& s) {
  const int n = s.node_count();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = distance_bound(p, s, i, j);
  return d;
}

SmockedGraph extract(const SmockingPattern& p) {
  validate(p);
  SmockedGraph s;
  const auto owner = line_membership(p);
  const int lines = static_cast<int>(p.lines.size());
  s.underlay_count_ = lines;
  for (int l = 0; l < lines; ++l) {
    Vec2 mean = Vec2::Zero();
    for (int v : p.lines[l].vertex_ids) mean += p.vertices[v];
    s.nodes.push_back({VertexClass::Underlay, l, mean / static_cast<double>(p.lines[l].vertex_ids.size())});
  }
  s.vertex_to_node.assign(p.vertices.size(), -1);
  for (int v = 0; v < p.vertex_count(); ++v) {
    if (owner[v] >= 0) {
      s.vertex_to_node[v] = owner[v];
    } else {
      s.vertex_to_node[v] = s.node_count();
      s.nodes.push_back({VertexClass::Pleat, v, p.vertices[v]});
    }
  }

  // Several pattern edges can land on the same node pair; they merge into one
  // edge keeping the smallest bound.
  std::map<std::pair<int, int>, double> merged;
  for (const Edge& e : p.edges) {
    const int na = s.vertex_to_node[e.a], nb = s.vertex_to_node[e.b];
    if (na == nb) continue;
    const auto key = std::minmax(na, nb);
    const double d = distance_bound(p, s, key.first, key.second);
    auto [it, fresh] = merged.emplace(key, d);
    if (!fresh) it->second = std::min(it->second, d);
  }
  for (const auto& [key, d] : merged) {
    const bool both_underlay = s.is_underlay(key.first) && s.is_underlay(key.second);
    if (!(d > 0.0))
      throw Error(ErrorKind::Degenerate, "zero-length bound between nodes " + std::to_string(key.first) + " and " +
                                             std::to_string(key.second));
    s.edges.push_back({key.first, key.second, both_underlay ? EdgeClass::Underlay : EdgeClass::Pleat, d});
  }

  if (lines >= 2 && s.underlay_edges().empty())
    throw Error(ErrorKind::Input,
                "underlay graph has no edges: the pattern is too fine or the underlay is disconnected; "
                "coarsen the grid or rebuild it with the grid-free builder");
  if (s.pleat_count() == 0) {
    s.warnings.emplace_back("pattern has no pleat nodes; consider inserting pleat nodes");
    spdlog::warn("{}", s.warnings.back());
  }
  if (lines >= 2 && !underlay_connected(s)) {
    s.warnings.emplace_back("underlay graph is not connected");
    spdlog::warn("{}", s.warnings.back());
  }
  return s;
}

bool underlay_connected(const SmockedGraph& s) {
  std::vector<Edge> edges;
  for (int e : s.underlay_edges()) edges.emplace_back(s.edges[e].a, s.edges[e].b);
  return is_connected(s.underlay_count(), edges);
}

}  // namespace smocklab
