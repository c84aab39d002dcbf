#include "smocklab/error.hpp"
#include "smocklab/io.hpp"
#include "smocklab/runner.hpp"
#include "smocklab/service.hpp"

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <sstream>

using namespace smocklab;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNotConverged = 3;

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Input, std::string("bad number '") + item + "' in " + what);
    }
  }
  return out;
}

std::vector<Vec2> parse_points(const std::string& text) {
  std::vector<Vec2> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto xy = parse_numbers(item, "--insert-pleats");
    if (xy.size() != 2) throw Error(ErrorKind::Input, "pleat positions are given as x,y;x,y;...");
    out.emplace_back(xy[0], xy[1]);
  }
  return out;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

void save(const SmockingPattern& p, const Json& params, const std::string& out) {
  emit(out, canonical_dump(to_json(document_from(p, params))));
}

struct GridArgs {
  std::string kind = "square";
  int cols = 4;
  int rows = 4;
  double spacing = 1.0;
  std::string out;
};

struct TileArgs {
  std::string in, out;
  int reps_x = 1, reps_y = 1, shift = 0;
};

struct EditArgs {
  std::string in, out;
  std::vector<std::string> add_lines;
  std::vector<int> delete_lines;
  int margin = 0;
  std::string combine;
  std::string axis = "x";
  int gap = 0;
  std::string radial;
  std::string warp;
  std::string insert_pleats;
};

struct SimulateArgs {
  std::string in, out;
  std::optional<int> subdivision;
  std::optional<double> w_embed, w_height;
  bool trace = false;
  std::string stage = "arap";
  std::string resume;
  std::string variant = "merged";
  std::string color = "none";
  std::string diagnostics;
};

int run_grid(const GridArgs& a) {
  GridSpec spec;
  if (a.kind == "square") spec.kind = GridKind::Square;
  else if (a.kind == "hexagonal") spec.kind = GridKind::Hexagonal;
  else throw Error(ErrorKind::Input, "grid kind must be square or hexagonal");
  spec.cols = a.cols;
  spec.rows = a.rows;
  spec.spacing = a.spacing;
  save(build_grid(spec), Json::object(), a.out);
  return 0;
}

int run_tile(const TileArgs& a) {
  const PatternDocument doc = load_pattern(a.in);
  save(tile_unit(materialize(doc), a.reps_x, a.reps_y, a.shift), doc.params, a.out);
  return 0;
}

int run_edit(const EditArgs& a) {
  const PatternDocument doc = load_pattern(a.in);
  SmockingPattern p = materialize(doc);
  for (int index : a.delete_lines) p = delete_line(p, index);
  for (const auto& text : a.add_lines) {
    StitchingLine line;
    for (double v : parse_numbers(text, "--add-line")) line.vertex_ids.push_back(static_cast<int>(v));
    p = add_line(p, std::move(line));
  }
  if (a.margin > 0) p = add_margin(p, Margins::uniform(a.margin));
  if (!a.combine.empty()) {
    if (a.axis != "x" && a.axis != "y") throw Error(ErrorKind::Input, "--axis must be x or y");
    p = combine(p, materialize(load_pattern(a.combine)), a.axis == "x" ? Axis::X : Axis::Y, a.gap);
  }
  if (!a.radial.empty()) {
    const auto v = parse_numbers(a.radial, "--radial");
    if (v.size() != 2) throw Error(ErrorKind::Input, "--radial takes inner_radius,angular_span");
    p = deform(p, RadialDeform{v[0], v[1]});
  }
  if (!a.warp.empty()) {
    const auto v = parse_numbers(a.warp, "--warp");
    if (v.size() != 3) throw Error(ErrorKind::Input, "--warp takes amplitude_x,amplitude_y,wavelength");
    p = deform(p, WarpField{v[0], v[1], v[2]});
  }
  if (!a.insert_pleats.empty()) {
    const auto points = parse_points(a.insert_pleats);
    p = insert_pleat_nodes(p, points);
  }
  save(p, doc.params, a.out);
  return 0;
}

int run_simulate(const SimulateArgs& a) {
  const PatternDocument doc = load_pattern(a.in);
  Json overrides = Json::object();
  if (a.subdivision) overrides["subdivision"] = *a.subdivision;
  if (a.w_embed) overrides["w_embed"] = *a.w_embed;
  if (a.w_height) overrides["w_height"] = *a.w_height;
  const Stage stage = parse_stage(a.stage);
  StageSeed seed;
  if (!a.resume.empty()) {
    Json j;
    try {
      j = Json::parse(read_text(a.resume));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorKind::Schema, a.resume + ": malformed JSON", "");
    }
    seed = parse_stage_seed(j);
  }
  const Simulation sim = simulate(doc, overrides, stage, seed);

  if (a.trace) {
    for (const auto& record : trace_records(sim.design)) std::cerr << record.dump() << '\n';
  }
  if (stage == Stage::Arap) {
    emit(a.out, render_obj(sim.pattern, sim.design, parse_variant(a.variant), parse_color(a.color)));
  } else {
    emit(a.out, canonical_dump(stage_json(sim.design)));
  }
  if (!a.diagnostics.empty()) {
    write_text(a.diagnostics,
               canonical_dump(diagnostics_json(sim.pattern, sim.design, sim.report ? &*sim.report : nullptr)));
  }
  for (const auto& w : sim.design.warnings) spdlog::warn("{}", w);
  if (!sim.design.converged()) {
    spdlog::error("solver did not converge");
    return kExitNotConverged;
  }
  return 0;
}

int run_analyze(const std::string& in) {
  const PatternDocument doc = load_pattern(in);
  const SmockingPattern p = materialize(doc);
  const ConstraintReport report = classify_pattern(p, resolve_params(doc, Json::object()).embed);
  std::cout << report_json(report).dump() << '\n';
  return report.converged ? 0 : kExitNotConverged;
}

int run_export(const std::string& in, const std::string& out, std::optional<int> subdivision) {
  const PatternDocument doc = load_pattern(in);
  const SmockingPattern p = materialize(doc);
  const int s = subdivision.value_or(resolve_params(doc, Json::object()).subdivision);
  const FinePattern fine = refine(p, s);
  std::vector<Vec3> flat;
  flat.reserve(fine.vertices.size());
  for (const auto& v : fine.vertices) flat.emplace_back(v.x(), v.y(), 0.0);
  emit(out, render_obj(flat, fine.faces));
  return 0;
}

int exit_code(const Error& e) { return e.kind() == ErrorKind::Solver ? kExitNotConverged : kExitInput; }

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("smocklab");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("SMOCKLAB_LOG")) spdlog::set_level(spdlog::level::from_str(level));

  CLI::App app{"smocklab: smocking pattern simulation"};
  app.require_subcommand(1);

  GridArgs grid;
  auto* grid_cmd = app.add_subcommand("grid", "write an empty square or hexagonal grid pattern");
  grid_cmd->add_option("--kind", grid.kind)->check(CLI::IsMember({"square", "hexagonal"}));
  grid_cmd->add_option("--cols", grid.cols);
  grid_cmd->add_option("--rows", grid.rows);
  grid_cmd->add_option("--spacing", grid.spacing);
  grid_cmd->add_option("-o,--out", grid.out);

  TileArgs tile;
  auto* tile_cmd = app.add_subcommand("tile", "repeat a unit pattern");
  tile_cmd->add_option("input", tile.in)->required();
  tile_cmd->add_option("--reps-x", tile.reps_x)->required();
  tile_cmd->add_option("--reps-y", tile.reps_y)->required();
  tile_cmd->add_option("--shift", tile.shift);
  tile_cmd->add_option("-o,--out", tile.out);

  EditArgs edit;
  auto* edit_cmd = app.add_subcommand("edit", "edit a pattern");
  edit_cmd->add_option("input", edit.in)->required();
  edit_cmd->add_option("-o,--out", edit.out);
  edit_cmd->add_option("--add-line", edit.add_lines, "comma-separated vertex ids");
  edit_cmd->add_option("--delete-line", edit.delete_lines, "line index");
  edit_cmd->add_option("--margin", edit.margin);
  edit_cmd->add_option("--combine", edit.combine, "pattern file to place next to the input");
  edit_cmd->add_option("--axis", edit.axis)->check(CLI::IsMember({"x", "y"}));
  edit_cmd->add_option("--gap", edit.gap);
  edit_cmd->add_option("--radial", edit.radial, "inner_radius,angular_span");
  edit_cmd->add_option("--warp", edit.warp, "amplitude_x,amplitude_y,wavelength");
  edit_cmd->add_option("--insert-pleats", edit.insert_pleats, "x,y;x,y;...");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run the smocking pipeline");
  sim_cmd->add_option("input", sim.in)->required();
  sim_cmd->add_option("-o,--out", sim.out);
  sim_cmd->add_option("--subdivision", sim.subdivision);
  sim_cmd->add_option("--w-embed", sim.w_embed);
  sim_cmd->add_option("--w-height", sim.w_height);
  sim_cmd->add_flag("--trace", sim.trace, "per-iteration records on stderr");
  sim_cmd->add_option("--stage", sim.stage)->check(CLI::IsMember({"underlay", "pleat", "arap"}));
  sim_cmd->add_option("--resume", sim.resume, "stage file from an earlier --stage run");
  sim_cmd->add_option("--variant", sim.variant)->check(CLI::IsMember({"fine", "merged"}));
  sim_cmd->add_option("--color", sim.color)->check(CLI::IsMember({"none", "height", "energy"}));
  sim_cmd->add_option("--diagnostics", sim.diagnostics, "write diagnostics JSON here");

  std::string analyze_in;
  auto* analyze_cmd = app.add_subcommand("analyze", "classify the pattern's underlay constraints");
  analyze_cmd->add_option("input", analyze_in)->required();

  std::string export_in, export_out;
  std::optional<int> export_subdivision;
  auto* export_cmd = app.add_subcommand("export", "write the flat refined fabric as OBJ");
  export_cmd->add_option("input", export_in)->required();
  export_cmd->add_option("-o,--out", export_out);
  export_cmd->add_option("--subdivision", export_subdivision);

  ServiceConfig service;
  std::string host = "127.0.0.1";
  int port = 8080;
  if (const char* env = std::getenv("SMOCKLAB_PORT")) port = std::atoi(env);
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP design service");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--data-dir", service.data_dir);
  serve_cmd->add_option("--sync-threshold", service.sync_threshold);
  serve_cmd->add_option("--cors-origin", service.cors_origin);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*grid_cmd) return run_grid(grid);
    if (*tile_cmd) return run_tile(tile);
    if (*edit_cmd) return run_edit(edit);
    if (*sim_cmd) return run_simulate(sim);
    if (*analyze_cmd) return run_analyze(analyze_in);
    if (*export_cmd) return run_export(export_in, export_out, export_subdivision);
    if (*serve_cmd) {
      DesignService svc(service);
      return svc.listen(host, port) ? 0 : kExitInput;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return 0;
}
