#include "smocklab/io.hpp"

#include "smocklab/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace smocklab {

namespace {

[[noreturn]] void schema(const std::string& pointer, const std::string& message) {
  throw Error(ErrorKind::Schema, pointer + ": " + message, pointer);
}

std::string at(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string at(const std::string& base, std::size_t index) { return base + "/" + std::to_string(index); }

const Json& member(const Json& obj, const char* key, const std::string& ptr) {
  auto it = obj.find(key);
  if (it == obj.end()) schema(ptr, std::string("missing required field '") + key + "'");
  return *it;
}

void only_keys(const Json& obj, std::initializer_list<const char*> keys, const std::string& ptr) {
  if (!obj.is_object()) schema(ptr.empty() ? "/" : ptr, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) schema(at(ptr, k), "unknown field");
  }
}

int as_int(const Json& j, const std::string& ptr) {
  if (!j.is_number_integer()) schema(ptr, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) schema(ptr, "integer out of range");
  return static_cast<int>(v);
}

double as_double(const Json& j, const std::string& ptr) {
  if (!j.is_number()) schema(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema(ptr, "expected a finite number");
  return v;
}

Vec2 as_point(const Json& j, const std::string& ptr) {
  if (!j.is_array() || j.size() != 2) schema(ptr, "expected a point [x, y]");
  return {as_double(j[0], at(ptr, 0)), as_double(j[1], at(ptr, 1))};
}

std::vector<Vec2> as_points(const Json& j, const std::string& ptr) {
  if (!j.is_array()) schema(ptr, "expected an array of points");
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(as_point(j[k], at(ptr, k)));
  return out;
}

Json point_json(const Vec2& p) { return Json::array({p.x(), p.y()}); }

GridKind parse_kind(const Json& j, const std::string& ptr) {
  if (!j.is_string()) schema(ptr, "expected a string");
  const auto s = j.get<std::string>();
  if (s == "square") return GridKind::Square;
  if (s == "hexagonal") return GridKind::Hexagonal;
  if (s == "explicit") return GridKind::Explicit;
  schema(ptr, "unknown grid kind '" + s + "'");
}

const char* kind_name(GridKind k) {
  switch (k) {
    case GridKind::Square: return "square";
    case GridKind::Hexagonal: return "hexagonal";
    case GridKind::Explicit: return "explicit";
  }
  return "square";
}

GridDeformation parse_deformation(const Json& j, const std::string& ptr) {
  if (!j.is_object()) schema(ptr, "expected an object");
  const Json& type = member(j, "type", ptr);
  if (type == "radial") {
    only_keys(j, {"type", "inner_radius", "angular_span"}, ptr);
    return RadialDeform{as_double(member(j, "inner_radius", ptr), at(ptr, "inner_radius")),
                        as_double(member(j, "angular_span", ptr), at(ptr, "angular_span"))};
  }
  if (type == "warp") {
    only_keys(j, {"type", "amplitude_x", "amplitude_y", "wavelength"}, ptr);
    WarpField w;
    if (j.contains("amplitude_x")) w.amplitude_x = as_double(j["amplitude_x"], at(ptr, "amplitude_x"));
    if (j.contains("amplitude_y")) w.amplitude_y = as_double(j["amplitude_y"], at(ptr, "amplitude_y"));
    w.wavelength = as_double(member(j, "wavelength", ptr), at(ptr, "wavelength"));
    return w;
  }
  schema(at(ptr, "type"), "unknown deformation type");
}

Json deformation_json(const GridDeformation& d) {
  if (const auto* r = std::get_if<RadialDeform>(&d))
    return {{"type", "radial"}, {"inner_radius", r->inner_radius}, {"angular_span", r->angular_span}};
  if (const auto* w = std::get_if<WarpField>(&d))
    return {{"type", "warp"}, {"amplitude_x", w->amplitude_x}, {"amplitude_y", w->amplitude_y},
            {"wavelength", w->wavelength}};
  return nullptr;
}

PleatSampling parse_sampling(const Json& j, const std::string& ptr) {
  only_keys(j, {"kind", "radius", "points"}, ptr);
  const Json& kind = member(j, "kind", ptr);
  PleatSampling s;
  if (kind == "midpoints") {
    s.kind = PleatSampling::Kind::Midpoints;
  } else if (kind == "poisson") {
    s.kind = PleatSampling::Kind::Poisson;
    s.radius = as_double(member(j, "radius", ptr), at(ptr, "radius"));
    if (!(s.radius > 0.0)) schema(at(ptr, "radius"), "radius must be positive");
  } else if (kind == "explicit") {
    s.kind = PleatSampling::Kind::Explicit;
    s.points = as_points(member(j, "points", ptr), at(ptr, "points"));
  } else {
    schema(at(ptr, "kind"), "unknown pleat sampling kind");
  }
  return s;
}

Json sampling_json(const PleatSampling& s) {
  switch (s.kind) {
    case PleatSampling::Kind::Midpoints: return {{"kind", "midpoints"}};
    case PleatSampling::Kind::Poisson: return {{"kind", "poisson"}, {"radius", s.radius}};
    case PleatSampling::Kind::Explicit: {
      Json pts = Json::array();
      for (const Vec2& p : s.points) pts.push_back(point_json(p));
      return {{"kind", "explicit"}, {"points", pts}};
    }
  }
  return nullptr;
}

int vertex_budget(const PatternDocument& doc) {
  if (doc.grid.kind == GridKind::Explicit) return static_cast<int>(doc.explicit_vertices.size());
  return (doc.grid.cols + 1) * (doc.grid.rows + 1) + static_cast<int>(doc.extra_vertices.size());
}

// Wall-clock time is left out so written artifacts stay reproducible.
Json stage_report_json(const StageReport& r) {
  return {{"energy", r.energy}, {"iterations", r.iterations}, {"converged", r.converged}, {"status", r.status}};
}

std::array<double, 3> ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return {t, 1.0 - std::abs(2.0 * t - 1.0), 1.0 - t};
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

PipelineParams parse_params(const Json& j, PipelineParams base, const std::string& ptr) {
  if (j.is_null()) return base;
  only_keys(j,
            {"w_embed", "w_height", "max_iters", "grad_tol", "energy_tol", "pleat_init_height", "subdivision",
             "arap_max_iters", "arap_tol", "weight_scheme", "epsilon_schedule"},
            ptr);
  auto nonneg = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    out = as_double(j[key], at(ptr, key));
    if (out < 0.0) schema(at(ptr, key), "must be non-negative");
  };
  auto positive = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    out = as_double(j[key], at(ptr, key));
    if (!(out > 0.0)) schema(at(ptr, key), "must be positive");
  };
  auto count = [&](const char* key, int& out) {
    if (!j.contains(key)) return;
    out = as_int(j[key], at(ptr, key));
    if (out < 1) schema(at(ptr, key), "must be >= 1");
  };
  nonneg("w_embed", base.embed.w_embed);
  nonneg("w_height", base.embed.w_height);
  count("max_iters", base.embed.max_iters);
  positive("grad_tol", base.embed.grad_tol);
  positive("energy_tol", base.embed.energy_tol);
  if (j.contains("pleat_init_height"))
    base.embed.pleat_init_height = as_double(j["pleat_init_height"], at(ptr, "pleat_init_height"));
  count("subdivision", base.subdivision);
  count("arap_max_iters", base.arap.max_outer_iters);
  positive("arap_tol", base.arap.tol);
  if (j.contains("weight_scheme")) {
    const auto& w = j["weight_scheme"];
    if (w == "cotangent")
      base.arap.weight_scheme = WeightScheme::Cotangent;
    else if (w == "uniform")
      base.arap.weight_scheme = WeightScheme::Uniform;
    else
      schema(at(ptr, "weight_scheme"), "expected 'cotangent' or 'uniform'");
  }
  if (j.contains("epsilon_schedule")) {
    const auto& e = j["epsilon_schedule"];
    const auto p = at(ptr, "epsilon_schedule");
    if (!e.is_array()) schema(p, "expected an array");
    base.arap.epsilon_schedule.clear();
    for (std::size_t k = 0; k < e.size(); ++k) {
      const double v = as_double(e[k], at(p, k));
      if (v < 0.0 || (k > 0 && v > base.arap.epsilon_schedule.back()))
        schema(at(p, k), "schedule must be non-negative and non-increasing");
      base.arap.epsilon_schedule.push_back(v);
    }
  }
  return base;
}

PatternDocument parse_pattern(const Json& j) {
  if (!j.is_object()) schema("", "pattern file must be a JSON object");
  const Json& version = member(j, "version", "");
  if (!version.is_number_integer()) schema("/version", "expected an integer");
  if (version.get<std::int64_t>() != kPatternFileVersion)
    throw Error(ErrorKind::UnsupportedVersion,
                "unsupported pattern file version " + version.dump() + " (expected " +
                    std::to_string(kPatternFileVersion) + ")",
                "/version");
  only_keys(j, {"version", "grid", "lines", "unit_cell", "tile", "pleat_sampling", "params", "name", "meta"}, "");

  PatternDocument doc;
  const Json& lines = member(j, "lines", "");
  if (!lines.is_array()) schema("/lines", "expected an array of stitching lines");
  const bool coordinate_form = !lines.empty() && lines[0].is_array() && !lines[0].empty() && lines[0][0].is_array();

  if (coordinate_form) {
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const auto ptr = at("/lines", l);
      auto pts = as_points(lines[l], ptr);
      if (pts.size() < 2) schema(ptr, "a stitching line needs at least 2 points");
      doc.coordinate_lines.push_back(std::move(pts));
    }
    if (j.contains("grid")) {
      only_keys(j["grid"], {"kind"}, "/grid");
      if (parse_kind(member(j["grid"], "kind", "/grid"), "/grid/kind") != GridKind::Explicit)
        schema("/grid/kind", "coordinate stitching lines require an explicit grid");
    }
    doc.grid.kind = GridKind::Explicit;
    if (j.contains("pleat_sampling")) doc.pleat_sampling = parse_sampling(j["pleat_sampling"], "/pleat_sampling");
  } else {
    const Json& grid = member(j, "grid", "");
    only_keys(grid, {"kind", "cols", "rows", "spacing", "deformation", "vertices", "edges", "extra_vertices"}, "/grid");
    doc.grid.kind = parse_kind(member(grid, "kind", "/grid"), "/grid/kind");
    if (doc.grid.kind == GridKind::Explicit) {
      doc.explicit_vertices = as_points(member(grid, "vertices", "/grid"), "/grid/vertices");
      const Json& edges = member(grid, "edges", "/grid");
      if (!edges.is_array()) schema("/grid/edges", "expected an array of index pairs");
      const int n = static_cast<int>(doc.explicit_vertices.size());
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto ptr = at("/grid/edges", k);
        if (!edges[k].is_array() || edges[k].size() != 2) schema(ptr, "expected an index pair");
        const int a = as_int(edges[k][0], at(ptr, 0)), b = as_int(edges[k][1], at(ptr, 1));
        if (a < 0 || a >= n) schema(at(ptr, 0), "vertex " + std::to_string(a) + " does not exist");
        if (b < 0 || b >= n) schema(at(ptr, 1), "vertex " + std::to_string(b) + " does not exist");
        if (a == b) schema(ptr, "edge joins a vertex to itself");
        doc.explicit_edges.emplace_back(a, b);
      }
    } else {
      doc.grid.cols = as_int(member(grid, "cols", "/grid"), "/grid/cols");
      doc.grid.rows = as_int(member(grid, "rows", "/grid"), "/grid/rows");
      doc.grid.spacing = grid.contains("spacing") ? as_double(grid["spacing"], "/grid/spacing") : 1.0;
      if (doc.grid.cols < 1) schema("/grid/cols", "must be >= 1");
      if (doc.grid.rows < 1) schema("/grid/rows", "must be >= 1");
      if (!(doc.grid.spacing > 0.0)) schema("/grid/spacing", "must be positive");
      if (grid.contains("deformation") && !grid["deformation"].is_null())
        doc.grid.deformation = parse_deformation(grid["deformation"], "/grid/deformation");
      try {
        validate_spec(doc.grid);
      } catch (const Error& e) {
        schema("/grid", e.what());
      }
      if (grid.contains("extra_vertices")) doc.extra_vertices = as_points(grid["extra_vertices"], "/grid/extra_vertices");
    }

    const int n = vertex_budget(doc);
    std::vector<int> owner(static_cast<std::size_t>(n), -1);
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const auto ptr = at("/lines", l);
      if (!lines[l].is_array()) schema(ptr, "expected an array of vertex indices");
      if (lines[l].size() < 2) schema(ptr, "a stitching line needs at least 2 vertices");
      StitchingLine line;
      for (std::size_t k = 0; k < lines[l].size(); ++k) {
        const auto vp = at(ptr, k);
        const int v = as_int(lines[l][k], vp);
        if (v < 0 || v >= n) schema(vp, "vertex " + std::to_string(v) + " does not exist");
        if (owner[v] == static_cast<int>(l)) schema(vp, "vertex " + std::to_string(v) + " repeats within the line");
        if (owner[v] >= 0)
          schema(vp, "vertex " + std::to_string(v) + " already belongs to line " + std::to_string(owner[v]));
        owner[v] = static_cast<int>(l);
        line.vertex_ids.push_back(v);
      }
      doc.index_lines.push_back(std::move(line));
    }
    if (j.contains("pleat_sampling")) schema("/pleat_sampling", "only grid-free patterns take a pleat sampling");
  }

  if (j.contains("unit_cell")) {
    const Json& u = j["unit_cell"];
    only_keys(u, {"i0", "j0", "width", "height"}, "/unit_cell");
    UnitCell cell;
    if (u.contains("i0")) cell.i0 = as_int(u["i0"], "/unit_cell/i0");
    if (u.contains("j0")) cell.j0 = as_int(u["j0"], "/unit_cell/j0");
    cell.width = as_int(member(u, "width", "/unit_cell"), "/unit_cell/width");
    cell.height = as_int(member(u, "height", "/unit_cell"), "/unit_cell/height");
    if (cell.width < 1) schema("/unit_cell/width", "must be >= 1");
    if (cell.height < 1) schema("/unit_cell/height", "must be >= 1");
    doc.unit_cell = cell;
  }
  if (j.contains("tile")) {
    const Json& t = j["tile"];
    only_keys(t, {"reps_x", "reps_y", "shift"}, "/tile");
    TileDirective tile;
    tile.reps_x = as_int(member(t, "reps_x", "/tile"), "/tile/reps_x");
    tile.reps_y = as_int(member(t, "reps_y", "/tile"), "/tile/reps_y");
    if (t.contains("shift")) tile.shift = as_int(t["shift"], "/tile/shift");
    if (tile.reps_x < 1) schema("/tile/reps_x", "must be >= 1");
    if (tile.reps_y < 1) schema("/tile/reps_y", "must be >= 1");
    if (!doc.unit_cell) schema("/tile", "tiling needs a unit_cell");
    if (doc.grid.kind == GridKind::Explicit) schema("/tile", "tiling needs a square or hexagonal grid");
    doc.tile = tile;
  }
  if (j.contains("params")) {
    parse_params(j["params"]);
    doc.params = j["params"];
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) schema("/name", "expected a string");
    doc.name = j["name"].get<std::string>();
  }
  if (j.contains("meta")) doc.meta = j["meta"];
  return doc;
}

Json to_json(const PatternDocument& doc) {
  Json j;
  j["version"] = kPatternFileVersion;
  Json lines = Json::array();
  if (doc.is_gridfree()) {
    for (const auto& line : doc.coordinate_lines) {
      Json pts = Json::array();
      for (const Vec2& p : line) pts.push_back(point_json(p));
      lines.push_back(pts);
    }
    j["grid"] = {{"kind", "explicit"}};
    if (doc.pleat_sampling) j["pleat_sampling"] = sampling_json(*doc.pleat_sampling);
  } else {
    Json grid;
    grid["kind"] = kind_name(doc.grid.kind);
    if (doc.grid.kind == GridKind::Explicit) {
      Json verts = Json::array(), edges = Json::array();
      for (const Vec2& p : doc.explicit_vertices) verts.push_back(point_json(p));
      for (const Edge& e : doc.explicit_edges) edges.push_back(Json::array({e.a, e.b}));
      grid["vertices"] = verts;
      grid["edges"] = edges;
    } else {
      grid["cols"] = doc.grid.cols;
      grid["rows"] = doc.grid.rows;
      grid["spacing"] = doc.grid.spacing;
      if (!std::holds_alternative<std::monostate>(doc.grid.deformation))
        grid["deformation"] = deformation_json(doc.grid.deformation);
      if (!doc.extra_vertices.empty()) {
        Json extra = Json::array();
        for (const Vec2& p : doc.extra_vertices) extra.push_back(point_json(p));
        grid["extra_vertices"] = extra;
      }
    }
    j["grid"] = grid;
    for (const auto& line : doc.index_lines) lines.push_back(line.vertex_ids);
  }
  j["lines"] = lines;
  if (doc.unit_cell)
    j["unit_cell"] = {{"i0", doc.unit_cell->i0}, {"j0", doc.unit_cell->j0}, {"width", doc.unit_cell->width},
                      {"height", doc.unit_cell->height}};
  if (doc.tile) j["tile"] = {{"reps_x", doc.tile->reps_x}, {"reps_y", doc.tile->reps_y}, {"shift", doc.tile->shift}};
  if (!doc.params.empty()) j["params"] = doc.params;
  if (doc.name) j["name"] = *doc.name;
  if (doc.meta) j["meta"] = *doc.meta;
  return j;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

PatternDocument load_pattern(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Schema, path.string() + ": malformed JSON (" + e.what() + ")", "");
  }
  return parse_pattern(j);
}

void save_pattern(const PatternDocument& doc, const std::filesystem::path& path) {
  write_text(path, canonical_dump(to_json(doc)));
}

SmockingPattern materialize(const PatternDocument& doc) {
  if (doc.is_gridfree()) {
    GridFreeInput in;
    in.lines = doc.coordinate_lines;
    if (doc.pleat_sampling) in.sampling = *doc.pleat_sampling;
    return build_gridfree(in);
  }
  SmockingPattern p;
  if (doc.grid.kind == GridKind::Explicit) {
    p.grid.kind = GridKind::Explicit;
    p.vertices = doc.explicit_vertices;
    p.edges = doc.explicit_edges;
  } else {
    p = build_grid(doc.grid);
  }
  p.lines = doc.index_lines;
  p.unit_cell = doc.unit_cell;
  const int grid_count = p.vertex_count();
  // Lines may name extra vertices by index; wire extras in before checking.
  if (!doc.extra_vertices.empty() && !doc.tile) p = insert_pleat_nodes(p, doc.extra_vertices);
  if (doc.tile) {
    for (const auto& line : p.lines)
      for (int v : line.vertex_ids)
        if (v >= grid_count) throw Error(ErrorKind::Schema, "tiled lines must use lattice vertices", "/lines");
    p = tile_unit(p, doc.tile->reps_x, doc.tile->reps_y, doc.tile->shift);
    if (!doc.extra_vertices.empty()) p = insert_pleat_nodes(p, doc.extra_vertices);
  }
  validate(p);
  return p;
}

PatternDocument document_from(const SmockingPattern& p, const Json& params) {
  PatternDocument doc;
  doc.grid = p.grid;
  doc.index_lines = p.lines;
  doc.unit_cell = p.unit_cell;
  doc.params = params.is_null() ? Json::object() : params;
  if (p.grid.kind == GridKind::Explicit) {
    doc.explicit_vertices = p.vertices;
    doc.explicit_edges = p.edges;
  } else {
    doc.extra_vertices.assign(p.vertices.begin() + p.grid_vertex_count(), p.vertices.end());
  }
  return doc;
}

MeshVariant parse_variant(const std::string& s) {
  if (s == "fine") return MeshVariant::Fine;
  if (s == "merged") return MeshVariant::Merged;
  throw Error(ErrorKind::Input, "unknown mesh variant '" + s + "'");
}

ColorField parse_color(const std::string& s) {
  if (s == "none") return ColorField::None;
  if (s == "height") return ColorField::Height;
  if (s == "energy") return ColorField::Energy;
  throw Error(ErrorKind::Input, "unknown color field '" + s + "'");
}

std::string render_obj(const std::vector<Vec3>& vertices, const std::vector<std::array<int, 3>>& faces,
                       const std::vector<double>* field) {
  double lo = 0.0, hi = 0.0;
  if (field && !field->empty()) {
    lo = *std::min_element(field->begin(), field->end());
    hi = *std::max_element(field->begin(), field->end());
  }
  std::string out;
  out.reserve(vertices.size() * 48 + faces.size() * 24);
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    out += "v ";
    out += format_double(vertices[v].x());
    out += ' ';
    out += format_double(vertices[v].y());
    out += ' ';
    out += format_double(vertices[v].z());
    if (field) {
      const double t = hi > lo ? ((*field)[v] - lo) / (hi - lo) : 0.0;
      for (double c : ramp(t)) {
        out += ' ';
        out += format_double(c);
      }
    }
    out += '\n';
  }
  for (const auto& f : faces) {
    out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' + std::to_string(f[2] + 1) + '\n';
  }
  return out;
}

std::string render_obj(const SmockingPattern& p, const SmockedDesign& design, MeshVariant variant,
                       ColorField color) {
  if (design.completed != Stage::Arap) throw Error(ErrorKind::Input, "design has no mesh before the arap stage");
  std::vector<double> fine_field;
  if (color == ColorField::Height) {
    fine_field = design.height_field;
  } else if (color == ColorField::Energy) {
    // Each fine vertex takes the value of the nearest coarse vertex at rest.
    const auto coarse = energy_distribution(p, design.graph, design.embedding);
    fine_field.resize(design.fine.vertices.size());
    for (std::size_t v = 0; v < design.fine.vertices.size(); ++v) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < p.vertex_count(); ++c) {
        const double d = (p.vertices[c] - design.fine.vertices[v]).squaredNorm();
        if (d < best) {
          best = d;
          fine_field[v] = coarse[c];
        }
      }
    }
  }
  const std::vector<double>* field = color == ColorField::None ? nullptr : &fine_field;
  if (variant == MeshVariant::Fine) return render_obj(design.fine_positions, design.fine.faces, field);

  std::vector<double> merged_field;
  if (field) {
    merged_field.assign(design.merged.vertices.size(), 0.0);
    for (std::size_t v = design.fine_positions.size(); v-- > 0;)
      merged_field[design.merged.fine_to_merged[v]] = fine_field[v];
  }
  return render_obj(design.merged.vertices, design.merged.faces, field ? &merged_field : nullptr);
}

Json stage_json(const SmockedDesign& d) {
  Json j;
  j["stage"] = to_string(d.completed);
  Json xy = Json::array();
  for (Eigen::Index i = 0; i < d.embedding.underlay_xy.rows(); ++i)
    xy.push_back(Json::array({d.embedding.underlay_xy(i, 0), d.embedding.underlay_xy(i, 1)}));
  j["underlay_xy"] = xy;
  j["underlay"] = stage_report_json(d.embedding.underlay);
  j["underlay_energy"] = d.embedding.underlay_energy;
  if (d.completed != Stage::Underlay) {
    Json xyz = Json::array();
    for (Eigen::Index i = 0; i < d.embedding.pleat_xyz.rows(); ++i)
      xyz.push_back(Json::array({d.embedding.pleat_xyz(i, 0), d.embedding.pleat_xyz(i, 1), d.embedding.pleat_xyz(i, 2)}));
    j["pleat_xyz"] = xyz;
    j["pleat"] = stage_report_json(d.embedding.pleat);
    j["pleat_energy"] = d.embedding.pleat_energy;
    j["pleat_spring_energy"] = d.embedding.pleat_spring_energy;
  }
  if (d.completed == Stage::Arap) {
    j["arap_energy"] = d.arap.energy;
    j["arap_iterations"] = d.arap.iterations;
  }
  return j;
}

StageSeed parse_stage_seed(const Json& j) {
  StageSeed seed;
  if (!j.is_object()) schema("", "stage file must be a JSON object");
  if (j.contains("underlay_xy")) {
    const auto pts = as_points(j["underlay_xy"], "/underlay_xy");
    Eigen::MatrixX2d xy(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t k = 0; k < pts.size(); ++k) xy.row(static_cast<Eigen::Index>(k)) = pts[k].transpose();
    seed.underlay_xy = xy;
  }
  if (j.contains("pleat_xyz")) {
    const Json& a = j["pleat_xyz"];
    if (!a.is_array()) schema("/pleat_xyz", "expected an array of points");
    Eigen::MatrixX3d xyz(static_cast<Eigen::Index>(a.size()), 3);
    for (std::size_t k = 0; k < a.size(); ++k) {
      const auto ptr = at("/pleat_xyz", k);
      if (!a[k].is_array() || a[k].size() != 3) schema(ptr, "expected [x, y, z]");
      for (int c = 0; c < 3; ++c) xyz(static_cast<Eigen::Index>(k), c) = as_double(a[k][c], at(ptr, c));
    }
    seed.pleat_xyz = xyz;
  }
  return seed;
}

Json report_json(const ConstraintReport& r) {
  Json slack = Json::array();
  for (const auto& s : r.slack_pairs) slack.push_back({{"i", s.i}, {"k", s.k}, {"via", s.via}, {"slack", s.slack}});
  return {{"classification", to_string(r.classification)},
          {"residual", r.residual},
          {"slack_pairs", slack},
          {"flex_dofs", r.flex_dofs},
          {"dof_note", r.dof_note},
          {"converged", r.converged}};
}

Json diagnostics_json(const SmockingPattern& p, const SmockedDesign& d, const ConstraintReport* report) {
  Json j = stage_json(d);
  j.erase("underlay_xy");
  j.erase("pleat_xyz");
  j["converged"] = d.converged();
  j["warnings"] = d.warnings;
  j["counts"] = {{"lines", p.lines.size()},
                 {"pattern_vertices", p.vertices.size()},
                 {"underlay_nodes", d.graph.underlay_count()},
                 {"pleat_nodes", d.graph.pleat_count()},
                 {"smocked_edges", d.graph.edges.size()}};
  if (d.completed == Stage::Arap) {
    const Shrinkage s = shrinkage(p, d);
    j["shrinkage"] = {{"ratio_x", s.ratio_x}, {"ratio_y", s.ratio_y}, {"area_ratio", s.area_ratio}};
    j["counts"]["fine_vertices"] = d.fine_positions.size();
    j["counts"]["merged_vertices"] = d.merged.vertices.size();
    j["counts"]["faces"] = d.fine.faces.size();
  }
  if (report) j["constraint_report"] = report_json(*report);
  return j;
}

Json trace_records(const SmockedDesign& d) {
  Json out = Json::array();
  auto add = [&](const char* stage, const std::vector<TraceRecord>& trace) {
    for (const auto& t : trace)
      out.push_back({{"stage", stage}, {"iteration", t.iteration}, {"energy", t.energy}, {"grad_norm", t.grad_norm}});
  };
  add("underlay", d.embedding.underlay.trace);
  if (d.completed != Stage::Underlay) add("pleat", d.embedding.pleat.trace);
  if (d.completed == Stage::Arap)
    for (std::size_t k = 0; k < d.arap.energy_trace.size(); ++k)
      out.push_back({{"stage", "arap"}, {"iteration", k}, {"energy", d.arap.energy_trace[k]}});
  return out;
}

}  // namespace smocklab
