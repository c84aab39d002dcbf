#include "smocklab/pattern.hpp"

#include "smocklab/delaunay.hpp"
#include "smocklab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace smocklab {

namespace {

bool is_lattice(GridKind kind) { return kind == GridKind::Square || kind == GridKind::Hexagonal; }

Vec2 lattice_base(const GridSpec& spec, double u, double v) {
  if (spec.kind == GridKind::Hexagonal) {
    // Brick-wall honeycomb: zigzag rows, vertical edges from "up" vertices.
    const int i = static_cast<int>(std::lround(u));
    const int j = static_cast<int>(std::lround(v));
    const double s = spec.spacing;
    const double lift = ((i + j) % 2 == 0) ? 0.5 * s : 0.0;
    return {u * 0.5 * std::numbers::sqrt3 * s, 1.5 * s * v + lift};
  }
  return {spec.spacing * u, spec.spacing * v};
}

void require_lattice(const SmockingPattern& p, const char* op) {
  if (!is_lattice(p.grid.kind))
    throw Error(ErrorKind::InvalidSpec, std::string(op) + " requires a square or hexagonal grid");
  if (p.has_inserted_vertices())
    throw Error(ErrorKind::InvalidSpec, std::string(op) + " is not supported on patterns with inserted vertices");
}

// Regenerate lattice positions for a (possibly resized) grid and remap lines.
SmockingPattern relattice(const GridSpec& spec, const std::vector<StitchingLine>& lines) {
  SmockingPattern out = build_grid(spec);
  out.lines = lines;
  return out;
}

void check_line_shape(const SmockingPattern& p, const StitchingLine& line, const std::string& label) {
  if (line.vertex_ids.size() < 2)
    throw Error(ErrorKind::InvalidSpec, label + " has fewer than 2 vertices");
  std::set<int> seen;
  for (int v : line.vertex_ids) {
    if (v < 0 || v >= p.vertex_count())
      throw Error(ErrorKind::NotFound, label + " references missing vertex " + std::to_string(v));
    if (!seen.insert(v).second)
      throw Error(ErrorKind::InvalidSpec, label + " repeats vertex " + std::to_string(v));
  }
}

// Split triangles so that `q` becomes a vertex of the mesh; returns its index.
int insert_point(FinePattern& fine, const Vec2& q, double snap) {
  for (int v = 0; v < fine.vertex_count(); ++v)
    if ((fine.vertices[v] - q).norm() <= snap) return v;

  const int id = fine.vertex_count();
  for (std::size_t f = 0; f < fine.faces.size(); ++f) {
    const auto t = fine.faces[f];
    const Vec2 &a = fine.vertices[t[0]], &b = fine.vertices[t[1]], &c = fine.vertices[t[2]];
    const int orient = geom::orient2d(a, b, c);
    if (orient == 0) continue;
    int o[3] = {geom::orient2d(a, b, q) * orient, geom::orient2d(b, c, q) * orient,
                geom::orient2d(c, a, q) * orient};
    if (o[0] < 0 || o[1] < 0 || o[2] < 0) continue;
    fine.vertices.push_back(q);
    const int zeros = (o[0] == 0) + (o[1] == 0) + (o[2] == 0);
    if (zeros == 0) {
      fine.faces[f] = {t[0], t[1], id};
      fine.faces.push_back({t[1], t[2], id});
      fine.faces.push_back({t[2], t[0], id});
      return id;
    }
    // On an edge: split every face sharing it.
    const int k = o[0] == 0 ? 0 : (o[1] == 0 ? 1 : 2);
    const int u = t[k], w = t[(k + 1) % 3];
    const std::size_t face_count = fine.faces.size();
    for (std::size_t g = 0; g < face_count; ++g) {
      auto s = fine.faces[g];
      for (int r = 0; r < 3; ++r) {
        const int s0 = s[r], s1 = s[(r + 1) % 3], s2 = s[(r + 2) % 3];
        if ((s0 == u && s1 == w) || (s0 == w && s1 == u)) {
          fine.faces[g] = {s0, id, s2};
          fine.faces.push_back({id, s1, s2});
          break;
        }
      }
    }
    return id;
  }
  throw Error(ErrorKind::InvalidSpec, "inserted vertex lies outside the fabric");
}

FinePattern refine_lattice_square(const SmockingPattern& p, int s) {
  const GridSpec& g = p.grid;
  const int C = g.cols * s;
  const int R = g.rows * s;
  FinePattern fine;
  fine.subdivision = s;
  fine.vertices.reserve(static_cast<std::size_t>(C + 1) * (R + 1));
  for (int J = 0; J <= R; ++J)
    for (int I = 0; I <= C; ++I)
      fine.vertices.push_back(grid_point(g, static_cast<double>(I) / s, static_cast<double>(J) / s));
  auto idx = [C](int I, int J) { return J * (C + 1) + I; };
  for (int J = 0; J < R; ++J) {
    for (int I = 0; I < C; ++I) {
      fine.faces.push_back({idx(I, J), idx(I + 1, J), idx(I + 1, J + 1)});
      fine.faces.push_back({idx(I, J), idx(I + 1, J + 1), idx(I, J + 1)});
    }
  }
  fine.coarse_to_fine.resize(p.vertices.size());
  for (int j = 0; j <= g.rows; ++j)
    for (int i = 0; i <= g.cols; ++i) fine.coarse_to_fine[grid_index(g, i, j)] = idx(i * s, j * s);
  return fine;
}

FinePattern refine_scattered(const SmockingPattern& p, int s) {
  // Delaunay triangulation of the coarse vertices plus a lattice over the
  // bounding box at spacing (median coarse edge length) / s.
  std::vector<double> lengths;
  for (const Edge& e : p.edges) lengths.push_back((p.vertices[e.a] - p.vertices[e.b]).norm());
  std::sort(lengths.begin(), lengths.end());
  const double h0 = lengths.empty() ? 1.0 : lengths[lengths.size() / 2];
  const double h = h0 / s;

  Vec2 lo = p.vertices.front(), hi = p.vertices.front();
  for (const Vec2& v : p.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::vector<Vec2> pts = p.vertices;
  const int nx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / h - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / h - 1e-9)));
  const double hx = (hi.x() - lo.x()) / nx;
  const double hy = (hi.y() - lo.y()) / ny;
  const double keep_out = 0.35 * h;
  for (int J = 0; J <= ny; ++J) {
    for (int I = 0; I <= nx; ++I) {
      const Vec2 q(lo.x() + hx * I, lo.y() + hy * J);
      bool near = false;
      for (const Vec2& v : p.vertices) {
        if ((v - q).norm() < keep_out) {
          near = true;
          break;
        }
      }
      if (!near) pts.push_back(q);
    }
  }
  const auto tri = geom::delaunay(pts);
  FinePattern fine;
  fine.subdivision = s;
  fine.vertices = std::move(pts);
  fine.faces = tri.triangles;
  fine.coarse_to_fine.resize(p.vertices.size());
  for (int v = 0; v < p.vertex_count(); ++v) fine.coarse_to_fine[v] = v;
  return fine;
}

}  // namespace

int SmockingPattern::grid_vertex_count() const {
  if (!is_lattice(grid.kind)) return vertex_count();
  return (grid.cols + 1) * (grid.rows + 1);
}

std::vector<Edge> FinePattern::edges() const {
  std::set<Edge> out;
  for (const auto& f : faces)
    for (int k = 0; k < 3; ++k) out.emplace(f[k], f[(k + 1) % 3]);
  return {out.begin(), out.end()};
}

void validate_spec(const GridSpec& spec) {
  if (spec.kind == GridKind::Explicit) return;
  if (spec.cols < 1 || spec.rows < 1)
    throw Error(ErrorKind::InvalidSpec, "grid needs cols >= 1 and rows >= 1");
  if (!(spec.spacing > 0.0) || !std::isfinite(spec.spacing))
    throw Error(ErrorKind::InvalidSpec, "grid spacing must be positive");
  if (const auto* r = std::get_if<RadialDeform>(&spec.deformation)) {
    if (spec.kind != GridKind::Square)
      throw Error(ErrorKind::InvalidSpec, "radial deformation applies to square grids only");
    if (!(r->inner_radius > 0.0))
      throw Error(ErrorKind::InvalidSpec, "radial inner_radius must be positive");
    if (!(r->angular_span > 0.0) || r->angular_span > 2.0 * std::numbers::pi + 1e-12)
      throw Error(ErrorKind::InvalidSpec, "radial angular_span must lie in (0, 2pi]");
  }
  if (const auto* w = std::get_if<WarpField>(&spec.deformation)) {
    if (!(w->wavelength > 0.0))
      throw Error(ErrorKind::InvalidSpec, "warp wavelength must be positive");
    const double amp = std::max(std::abs(w->amplitude_x), std::abs(w->amplitude_y));
    if (2.0 * std::numbers::pi * amp >= w->wavelength)
      throw Error(ErrorKind::InvalidSpec, "warp amplitude too large for an injective warp");
  }
}

int grid_index(const GridSpec& spec, int i, int j) { return j * (spec.cols + 1) + i; }

std::array<int, 2> grid_coords(const GridSpec& spec, int vertex) {
  return {vertex % (spec.cols + 1), vertex / (spec.cols + 1)};
}

Vec2 grid_point(const GridSpec& spec, double u, double v) {
  if (const auto* r = std::get_if<RadialDeform>(&spec.deformation)) {
    // A full circle spreads cols+1 columns so the first and last do not meet.
    const bool full = r->angular_span >= 2.0 * std::numbers::pi - 1e-12;
    const double columns = full ? spec.cols + 1 : spec.cols;
    const double theta = r->angular_span * u / columns;
    const double radius = r->inner_radius + spec.spacing * v;
    return {radius * std::cos(theta), radius * std::sin(theta)};
  }
  Vec2 pos = lattice_base(spec, u, v);
  if (const auto* w = std::get_if<WarpField>(&spec.deformation)) {
    const double k = 2.0 * std::numbers::pi / w->wavelength;
    const Vec2 flat = pos;
    pos.x() += w->amplitude_x * std::sin(k * flat.y());
    pos.y() += w->amplitude_y * std::sin(k * flat.x());
  }
  return pos;
}

SmockingPattern build_grid(const GridSpec& spec) {
  if (spec.kind == GridKind::Explicit)
    throw Error(ErrorKind::InvalidSpec, "explicit grids carry their own vertices; nothing to build");
  validate_spec(spec);
  SmockingPattern p;
  p.grid = spec;
  const int c = spec.cols, r = spec.rows;
  p.vertices.reserve(static_cast<std::size_t>(c + 1) * (r + 1));
  for (int j = 0; j <= r; ++j)
    for (int i = 0; i <= c; ++i) p.vertices.push_back(grid_point(spec, i, j));

  auto id = [&](int i, int j) { return grid_index(spec, i, j); };
  for (int j = 0; j <= r; ++j)
    for (int i = 0; i < c; ++i) p.edges.emplace_back(id(i, j), id(i + 1, j));
  if (spec.kind == GridKind::Square) {
    for (int j = 0; j < r; ++j)
      for (int i = 0; i <= c; ++i) p.edges.emplace_back(id(i, j), id(i, j + 1));
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i < c; ++i) {
        p.edges.emplace_back(id(i, j), id(i + 1, j + 1));
        p.edges.emplace_back(id(i + 1, j), id(i, j + 1));
      }
    }
  } else {
    for (int j = 0; j < r; ++j)
      for (int i = 0; i <= c; ++i)
        if ((i + j) % 2 == 0) p.edges.emplace_back(id(i, j), id(i, j + 1));
  }
  return p;
}

bool is_connected(int n, const std::vector<Edge>& edges) {
  if (n <= 1) return true;
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = n;
  for (const Edge& e : edges) {
    const int a = find(e.a), b = find(e.b);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

std::vector<int> line_membership(const SmockingPattern& p) {
  std::vector<int> owner(p.vertices.size(), -1);
  for (std::size_t l = 0; l < p.lines.size(); ++l)
    for (int v : p.lines[l].vertex_ids)
      if (v >= 0 && v < p.vertex_count()) owner[v] = static_cast<int>(l);
  return owner;
}

void validate(const SmockingPattern& p) {
  if (p.vertices.empty()) throw Error(ErrorKind::InvalidSpec, "pattern has no vertices");
  for (std::size_t v = 0; v < p.vertices.size(); ++v)
    if (!p.vertices[v].allFinite())
      throw Error(ErrorKind::InvalidSpec, "vertex " + std::to_string(v) + " is not finite");
  for (const Edge& e : p.edges)
    if (e.a < 0 || e.b >= p.vertex_count() || e.a == e.b)
      throw Error(ErrorKind::InvalidSpec, "edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) + ") is invalid");
  std::vector<int> owner(p.vertices.size(), -1);
  for (std::size_t l = 0; l < p.lines.size(); ++l) {
    check_line_shape(p, p.lines[l], "line " + std::to_string(l));
    for (int v : p.lines[l].vertex_ids) {
      if (owner[v] >= 0)
        throw Error(ErrorKind::Conflict, "lines " + std::to_string(owner[v]) + " and " + std::to_string(l) +
                                             " share vertex " + std::to_string(v));
      owner[v] = static_cast<int>(l);
    }
  }
  if (!is_connected(p.vertex_count(), p.edges))
    throw Error(ErrorKind::InvalidSpec, "pattern graph is not connected");
}

SmockingPattern tile_unit(const SmockingPattern& unit, int reps_x, int reps_y, int shift) {
  require_lattice(unit, "tiling");
  if (!unit.unit_cell) throw Error(ErrorKind::InvalidSpec, "tiling needs a declared unit_cell");
  if (reps_x < 1 || reps_y < 1) throw Error(ErrorKind::InvalidSpec, "tiling repetitions must be >= 1");
  const UnitCell cell = *unit.unit_cell;
  if (cell.width < 1 || cell.height < 1) throw Error(ErrorKind::InvalidSpec, "unit_cell must have positive size");
  if (unit.grid.kind == GridKind::Hexagonal && (cell.width % 2 != 0 || (cell.height + shift) % 2 != 0))
    throw Error(ErrorKind::InvalidSpec, "hexagonal tiling translations must preserve lattice parity");

  const int row_drift = (reps_y - 1) * shift;
  const int offset = std::max(0, -row_drift);
  GridSpec spec = unit.grid;
  spec.cols = (reps_x - 1) * cell.width + std::abs(row_drift) + unit.grid.cols;
  spec.rows = (reps_y - 1) * cell.height + unit.grid.rows;

  std::vector<StitchingLine> lines;
  std::vector<int> owner(static_cast<std::size_t>(spec.cols + 1) * (spec.rows + 1), -1);
  for (int ry = 0; ry < reps_y; ++ry) {
    for (int rx = 0; rx < reps_x; ++rx) {
      const int di = rx * cell.width + ry * shift + offset;
      const int dj = ry * cell.height;
      for (const auto& line : unit.lines) {
        StitchingLine moved;
        for (int v : line.vertex_ids) {
          const auto [i, j] = grid_coords(unit.grid, v);
          const int w = grid_index(spec, i + di, j + dj);
          if (owner[w] >= 0)
            throw Error(ErrorKind::Conflict, "tiled lines " + std::to_string(owner[w]) + " and " +
                                                 std::to_string(lines.size()) + " share vertex " + std::to_string(w));
          owner[w] = static_cast<int>(lines.size());
          moved.vertex_ids.push_back(w);
        }
        lines.push_back(std::move(moved));
      }
    }
  }
  SmockingPattern out = relattice(spec, lines);
  out.unit_cell = UnitCell{cell.i0 + offset, cell.j0, cell.width, cell.height};
  return out;
}

SmockingPattern add_line(const SmockingPattern& p, StitchingLine line) {
  check_line_shape(p, line, "new line");
  const auto owner = line_membership(p);
  for (int v : line.vertex_ids)
    if (owner[v] >= 0)
      throw Error(ErrorKind::Conflict, "new line shares vertex " + std::to_string(v) + " with line " +
                                           std::to_string(owner[v]));
  SmockingPattern out = p;
  out.lines.push_back(std::move(line));
  return out;
}

SmockingPattern delete_line(const SmockingPattern& p, int line_index) {
  if (line_index < 0 || line_index >= static_cast<int>(p.lines.size()))
    throw Error(ErrorKind::NotFound, "no stitching line " + std::to_string(line_index));
  SmockingPattern out = p;
  out.lines.erase(out.lines.begin() + line_index);
  return out;
}

SmockingPattern add_margin(const SmockingPattern& p, Margins m) {
  require_lattice(p, "add_margin");
  if (m.left < 0 || m.right < 0 || m.bottom < 0 || m.top < 0)
    throw Error(ErrorKind::InvalidSpec, "margins must be non-negative");
  if (p.grid.kind == GridKind::Hexagonal && (m.left + m.bottom) % 2 != 0)
    throw Error(ErrorKind::InvalidSpec, "hexagonal margins must keep left + bottom even");
  GridSpec spec = p.grid;
  spec.cols += m.left + m.right;
  spec.rows += m.bottom + m.top;
  std::vector<StitchingLine> lines = p.lines;
  for (auto& line : lines) {
    for (int& v : line.vertex_ids) {
      const auto [i, j] = grid_coords(p.grid, v);
      v = grid_index(spec, i + m.left, j + m.bottom);
    }
  }
  SmockingPattern out = relattice(spec, lines);
  if (p.unit_cell) {
    out.unit_cell = *p.unit_cell;
    out.unit_cell->i0 += m.left;
    out.unit_cell->j0 += m.bottom;
  }
  return out;
}

SmockingPattern combine(const SmockingPattern& p, const SmockingPattern& other, Axis axis, int gap) {
  require_lattice(p, "combine");
  require_lattice(other, "combine");
  if (gap < 0) throw Error(ErrorKind::InvalidSpec, "combine gap must be >= 0");
  if (p.grid.kind != other.grid.kind || p.grid.spacing != other.grid.spacing)
    throw Error(ErrorKind::InvalidSpec, "combine needs grids of the same kind and spacing");
  if (!std::holds_alternative<std::monostate>(p.grid.deformation) ||
      !std::holds_alternative<std::monostate>(other.grid.deformation))
    throw Error(ErrorKind::InvalidSpec, "combine needs undeformed grids");

  const int di = axis == Axis::X ? p.grid.cols + gap : 0;
  const int dj = axis == Axis::Y ? p.grid.rows + gap : 0;
  if (p.grid.kind == GridKind::Hexagonal && (di + dj) % 2 != 0)
    throw Error(ErrorKind::InvalidSpec, "hexagonal combine offset must be even");

  GridSpec spec = p.grid;
  spec.cols = std::max(p.grid.cols, di + other.grid.cols);
  spec.rows = std::max(p.grid.rows, dj + other.grid.rows);

  std::vector<StitchingLine> lines;
  std::vector<int> owner(static_cast<std::size_t>(spec.cols + 1) * (spec.rows + 1), -1);
  auto place = [&](const SmockingPattern& src, int oi, int oj) {
    for (const auto& line : src.lines) {
      StitchingLine moved;
      for (int v : line.vertex_ids) {
        const auto [i, j] = grid_coords(src.grid, v);
        const int w = grid_index(spec, i + oi, j + oj);
        if (owner[w] >= 0)
          throw Error(ErrorKind::Conflict, "combined lines " + std::to_string(owner[w]) + " and " +
                                               std::to_string(lines.size()) + " share vertex " + std::to_string(w));
        owner[w] = static_cast<int>(lines.size());
        moved.vertex_ids.push_back(w);
      }
      lines.push_back(std::move(moved));
    }
  };
  place(p, 0, 0);
  place(other, di, dj);
  return relattice(spec, lines);
}

SmockingPattern deform(const SmockingPattern& p, GridDeformation deformation) {
  require_lattice(p, "deform");
  GridSpec spec = p.grid;
  spec.deformation = deformation;
  SmockingPattern out = relattice(spec, p.lines);
  out.unit_cell = p.unit_cell;
  return out;
}

SmockingPattern edit_pattern(const SmockingPattern& p, const EditOp& op) {
  return std::visit(
      [&](const auto& e) -> SmockingPattern {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, edit::AddLine>) return add_line(p, e.line);
        if constexpr (std::is_same_v<T, edit::DeleteLine>) return delete_line(p, e.index);
        if constexpr (std::is_same_v<T, edit::AddMargin>) return add_margin(p, e.margins);
        if constexpr (std::is_same_v<T, edit::Combine>) return combine(p, e.other, e.axis, e.gap);
        if constexpr (std::is_same_v<T, edit::Deform>) return deform(p, e.deformation);
      },
      op);
}

FinePattern refine(const SmockingPattern& p, int subdivision) {
  if (subdivision < 1) throw Error(ErrorKind::InvalidSpec, "subdivision must be >= 1");
  if (p.grid.kind != GridKind::Square) return refine_scattered(p, subdivision);

  FinePattern fine = refine_lattice_square(p, subdivision);
  const double snap = 1e-9 * p.grid.spacing;
  for (int v = p.grid_vertex_count(); v < p.vertex_count(); ++v)
    fine.coarse_to_fine[v] = insert_point(fine, p.vertices[v], snap);
  return fine;
}

}  // namespace smocklab
