#pragma once

#include "smocklab/pattern.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace smocklab {

enum class VertexClass { Underlay, Pleat };
enum class EdgeClass { Degenerated, Underlay, Pleat };

struct Classification {
  std::vector<VertexClass> vertices;
  std::vector<EdgeClass> edges;  // parallel to pattern.edges
};

Classification classify(const SmockingPattern& p);

struct SmockedNode {
  VertexClass kind = VertexClass::Pleat;
  int source = -1;  // stitching-line id for underlay nodes, pattern vertex id for pleat nodes
  Vec2 rest = Vec2::Zero();  // mean flat position of the node's pattern points
};

struct SmockedEdge {
  int a = 0;
  int b = 0;  // a < b, node ids
  EdgeClass kind = EdgeClass::Pleat;
  double bound = 0.0;
};

/// Stitching lines fused into single nodes. Underlay nodes come first and
/// node i < |L| is line i; pleat nodes follow in pattern-vertex order.
struct SmockedGraph {
  std::vector<SmockedNode> nodes;
  std::vector<SmockedEdge> edges;
  std::vector<int> vertex_to_node;  // pattern vertex -> node id
  std::vector<std::string> warnings;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int underlay_count() const { return underlay_count_; }
  int pleat_count() const { return node_count() - underlay_count_; }
  bool is_underlay(int node) const { return node < underlay_count_; }
  std::vector<int> underlay_edges() const;
  std::vector<int> pleat_edges() const;

  int underlay_count_ = 0;
};

/// Fuses lines, drops degenerated edges, merges duplicates keeping the
/// smallest bound. Throws Error(Input) when two or more lines end up with no
/// underlay edge between them.
SmockedGraph extract(const SmockingPattern& p);

/// Embedding distance bound between two smocked-graph nodes, measured with
/// Euclidean distances on the flat pattern.
double distance_bound(const SmockingPattern& p, const SmockedGraph& s, int a, int b);

/// Dense symmetric matrix of bounds, zero diagonal.
Eigen::MatrixXd all_pair_bounds(const SmockingPattern& p, const SmockedGraph& s);

/// Whether the underlay nodes form one component through underlay edges.
bool underlay_connected(const SmockedGraph& s);

}  // namespace smocklab
