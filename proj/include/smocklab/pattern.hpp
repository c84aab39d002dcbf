#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <variant>
#include <vector>

namespace smocklab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Undirected edge, stored with a < b.
struct Edge {
  int a = 0;
  int b = 0;

  Edge() = default;
  Edge(int u, int v) : a(u < v ? u : v), b(u < v ? v : u) {}

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class GridKind { Square, Hexagonal, Explicit };

/// Bends a square grid into an annulus sector: columns map to angle, rows to
/// radius (inner_radius + row * spacing).
struct RadialDeform {
  double inner_radius = 1.0;
  double angular_span = 3.14159265358979323846;

  friend bool operator==(const RadialDeform&, const RadialDeform&) = default;
};

/// Smooth sinusoidal warp of the flat grid:
///   x' = x + amplitude_x * sin(2 pi y / wavelength)
///   y' = y + amplitude_y * sin(2 pi x / wavelength)
/// Injective while 2 pi max(|amplitude|) < wavelength.
struct WarpField {
  double amplitude_x = 0.0;
  double amplitude_y = 0.0;
  double wavelength = 1.0;

  friend bool operator==(const WarpField&, const WarpField&) = default;
};

using GridDeformation = std::variant<std::monostate, RadialDeform, WarpField>;

struct GridSpec {
  GridKind kind = GridKind::Square;
  int cols = 1;
  int rows = 1;
  double spacing = 1.0;
  GridDeformation deformation;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Unit-pattern period box in grid-cell units; width/height are the tiling
/// translations.
struct UnitCell {
  int i0 = 0;
  int j0 = 0;
  int width = 1;
  int height = 1;

  friend bool operator==(const UnitCell&, const UnitCell&) = default;
};

struct StitchingLine {
  std::vector<int> vertex_ids;

  friend bool operator==(const StitchingLine&, const StitchingLine&) = default;
};

/// Fabric graph plus stitching lines. For square and hexagonal grids the first
/// grid_vertex_count() vertices are lattice vertices in row-major (i, j) order;
/// any vertices after that were inserted (e.g. extra pleat nodes). Explicit
/// patterns carry arbitrary vertices and edges.
struct SmockingPattern {
  std::vector<Vec2> vertices;
  std::vector<Edge> edges;
  std::vector<StitchingLine> lines;
  GridSpec grid;
  std::optional<UnitCell> unit_cell;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int grid_vertex_count() const;
  bool has_inserted_vertices() const { return vertex_count() > grid_vertex_count(); }

  friend bool operator==(const SmockingPattern&, const SmockingPattern&) = default;
};

/// Triangulated high-resolution fabric. coarse_to_fine[v] is the fine vertex
/// sitting at coarse vertex v's position.
struct FinePattern {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<int> coarse_to_fine;
  int subdivision = 1;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  std::vector<Edge> edges() const;
};

// Grid construction ----------------------------------------------------------

void validate_spec(const GridSpec& spec);

/// Lattice vertex index for (i, j); square and hexagonal grids.
int grid_index(const GridSpec& spec, int i, int j);
std::array<int, 2> grid_coords(const GridSpec& spec, int vertex);

/// Position of lattice parameter (u, v) including any deformation. Integer
/// parameters reproduce vertex positions exactly.
Vec2 grid_point(const GridSpec& spec, double u, double v);

SmockingPattern build_grid(const GridSpec& spec);

// Validation -----------------------------------------------------------------

bool is_connected(int vertex_count, const std::vector<Edge>& edges);

/// Throws Error on any invariant violation (line size, distinctness,
/// disjointness, index range, connectivity).
void validate(const SmockingPattern& p);

/// Index of the line containing each vertex, or -1.
std::vector<int> line_membership(const SmockingPattern& p);

// Editing --------------------------------------------------------------------

struct Margins {
  int left = 0;
  int right = 0;
  int bottom = 0;
  int top = 0;

  static Margins uniform(int n) { return {n, n, n, n}; }
};

enum class Axis { X, Y };

SmockingPattern tile_unit(const SmockingPattern& unit, int reps_x, int reps_y, int shift = 0);

SmockingPattern add_line(const SmockingPattern& p, StitchingLine line);
SmockingPattern delete_line(const SmockingPattern& p, int line_index);
SmockingPattern add_margin(const SmockingPattern& p, Margins margins);
SmockingPattern combine(const SmockingPattern& p, const SmockingPattern& other, Axis axis, int gap);
SmockingPattern deform(const SmockingPattern& p, GridDeformation deformation);

namespace edit {
struct AddLine { StitchingLine line; };
struct DeleteLine { int index = 0; };
struct AddMargin { Margins margins; };
struct Combine {
  SmockingPattern other;
  Axis axis = Axis::X;
  int gap = 0;
};
struct Deform { GridDeformation deformation; };
}  // namespace edit

using EditOp = std::variant<edit::AddLine, edit::DeleteLine, edit::AddMargin, edit::Combine, edit::Deform>;

SmockingPattern edit_pattern(const SmockingPattern& p, const EditOp& op);

// Refinement -----------------------------------------------------------------

inline constexpr int kDefaultSubdivision = 2;

FinePattern refine(const SmockingPattern& p, int subdivision = kDefaultSubdivision);

}  // namespace smocklab
