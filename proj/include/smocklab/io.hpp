#pragma once

#include "smocklab/analysis.hpp"
#include "smocklab/design.hpp"
#include "smocklab/gridfree.hpp"
#include "smocklab/pattern.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace smocklab {

using Json = nlohmann::json;

inline constexpr int kPatternFileVersion = 1;

struct TileDirective {
  int reps_x = 1;
  int reps_y = 1;
  int shift = 0;
};

/// In-memory form of a PatternFile. Lines are vertex-index lists for grid
/// patterns and coordinate polylines for grid-free input.
struct PatternDocument {
  GridSpec grid;
  std::vector<Vec2> explicit_vertices;
  std::vector<Edge> explicit_edges;
  std::vector<Vec2> extra_vertices;
  std::vector<StitchingLine> index_lines;
  std::vector<std::vector<Vec2>> coordinate_lines;
  std::optional<UnitCell> unit_cell;
  std::optional<TileDirective> tile;
  std::optional<PleatSampling> pleat_sampling;
  Json params = Json::object();
  std::optional<std::string> name;
  std::optional<Json> meta;

  bool is_gridfree() const { return !coordinate_lines.empty(); }
};

/// Throws Error(Schema) with a JSON pointer, or Error(UnsupportedVersion).
PatternDocument parse_pattern(const Json& j);
Json to_json(const PatternDocument& doc);

PatternDocument load_pattern(const std::filesystem::path& path);
void save_pattern(const PatternDocument& doc, const std::filesystem::path& path);

/// Sorted keys, shortest round-trip floats, trailing newline.
std::string canonical_dump(const Json& j);

/// Concrete pattern: grid built, tiling applied, extra vertices wired in, or
/// the grid-free construction run.
SmockingPattern materialize(const PatternDocument& doc);

/// Document describing an already materialized pattern.
PatternDocument document_from(const SmockingPattern& p, const Json& params = Json::object());

/// Parameter overrides from a "params" object; unknown keys are schema errors.
PipelineParams parse_params(const Json& params, PipelineParams base = {}, const std::string& pointer = "/params");

// Meshes ---------------------------------------------------------------------

enum class MeshVariant { Fine, Merged };
enum class ColorField { None, Height, Energy };

MeshVariant parse_variant(const std::string& s);
ColorField parse_color(const std::string& s);

/// Wavefront text for the design. With a color field, vertices carry RGB.
std::string render_obj(const SmockingPattern& p, const SmockedDesign& design, MeshVariant variant,
                       ColorField color = ColorField::None);
std::string render_obj(const std::vector<Vec3>& vertices, const std::vector<std::array<int, 3>>& faces,
                       const std::vector<double>* field = nullptr);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

// Stage artifacts and diagnostics -------------------------------------------

Json stage_json(const SmockedDesign& design);
StageSeed parse_stage_seed(const Json& j);
Json report_json(const ConstraintReport& r);
Json diagnostics_json(const SmockingPattern& p, const SmockedDesign& design, const ConstraintReport* report);
Json trace_records(const SmockedDesign& design);

}  // namespace smocklab
