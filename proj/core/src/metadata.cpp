#include "ctpack/metadata.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "ctpack/error.hpp"

namespace ctpack {

void write_json_file(const std::filesystem::path& file, const json& value) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  const auto tmp = std::filesystem::path(file.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::WriteError, tmp.string());
    out << value.dump(2) << '\n';
    if (!out) fail(Errc::WriteError, tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::ParseError, file.string() + ": " + e.what());
  }
}

json to_json(const AlignmentParams& p) {
  return {{"angle_deg", p.angle_deg},
          {"row_range", {p.rows.start, p.rows.stop}},
          {"col_range", {p.cols.start, p.cols.stop}}};
}

AlignmentParams alignment_from_json(const json& j) {
  AlignmentParams p;
  p.angle_deg = j.at("angle_deg").get<double>();
  p.rows = {j.at("row_range")[0].get<std::size_t>(), j.at("row_range")[1].get<std::size_t>()};
  p.cols = {j.at("col_range")[0].get<std::size_t>(), j.at("col_range")[1].get<std::size_t>()};
  return p;
}

json to_json(const ThresholdSet& t) {
  json j = {{"a_divider", t.a_divider}, {"b_divider", t.b_divider}, {"a_object", t.a_object}};
  j["b_object"] = std::isinf(t.b_object) ? json(nullptr) : json(t.b_object);
  return j;
}

ThresholdSet thresholds_from_json(const json& j) {
  ThresholdSet t;
  t.a_divider = j.at("a_divider").get<double>();
  t.b_divider = j.at("b_divider").get<double>();
  t.a_object = j.at("a_object").get<double>();
  if (j.contains("b_object") && !j.at("b_object").is_null()) t.b_object = j.at("b_object").get<double>();
  return t;
}

json to_json(const TierSlab& s) { return {{"z_start", s.z_start}, {"z_stop", s.z_stop}}; }

TierSlab slab_from_json(const json& j) {
  return {j.at("z_start").get<std::size_t>(), j.at("z_stop").get<std::size_t>()};
}

json to_json(const Peak& p) {
  return {{"index", p.index},           {"position", p.position},     {"height", p.height},
          {"prominence", p.prominence}, {"width", p.width},           {"left_ip", p.left_ip},
          {"right_ip", p.right_ip},     {"left_base", p.left_base},   {"right_base", p.right_base}};
}

json to_json(const GridCuts& g) {
  return {{"row_cuts", g.row_cuts},
          {"col_cuts", g.col_cuts},
          {"rotation_deg", g.rotation_deg},
          {"row_mode", std::string(to_string(g.row_mode))},
          {"col_mode", std::string(to_string(g.col_mode))},
          {"row_candidates", g.row_candidates},
          {"col_candidates", g.col_candidates}};
}

GridCuts grid_cuts_from_json(const json& j) {
  GridCuts g;
  g.row_cuts = j.at("row_cuts").get<std::vector<double>>();
  g.col_cuts = j.at("col_cuts").get<std::vector<double>>();
  g.rotation_deg = j.at("rotation_deg").get<double>();
  g.row_mode = cut_mode_from_string(j.at("row_mode").get<std::string>());
  g.col_mode = cut_mode_from_string(j.at("col_mode").get<std::string>());
  g.row_candidates = j.value("row_candidates", std::vector<double>{});
  g.col_candidates = j.value("col_candidates", std::vector<double>{});
  return g;
}

json to_json(const BoxRange& b) {
  return {{"x", {b.x0, b.x1}}, {"y", {b.y0, b.y1}}, {"z", {b.z0, b.z1}}};
}

BoxRange box_range_from_json(const json& j) {
  return {j.at("x")[0].get<std::size_t>(), j.at("x")[1].get<std::size_t>(), j.at("y")[0].get<std::size_t>(),
          j.at("y")[1].get<std::size_t>(), j.at("z")[0].get<std::size_t>(), j.at("z")[1].get<std::size_t>()};
}

json to_json(const ScanGeometry& g) {
  return {{"alignment", to_json(g.alignment)},
          {"scale", {g.scale_x, g.scale_y}},
          {"z_factor", g.z_factor},
          {"subsampled_size", g.subsampled_size},
          {"scan_dims", {g.width, g.height, g.depth}}};
}

ScanGeometry geometry_from_json(const json& j) {
  ScanGeometry g;
  g.alignment = alignment_from_json(j.at("alignment"));
  g.scale_x = j.at("scale")[0].get<double>();
  g.scale_y = j.at("scale")[1].get<double>();
  g.z_factor = j.at("z_factor").get<std::size_t>();
  g.subsampled_size = j.at("subsampled_size").get<std::size_t>();
  g.width = j.at("scan_dims")[0].get<std::size_t>();
  g.height = j.at("scan_dims")[1].get<std::size_t>();
  g.depth = j.at("scan_dims")[2].get<std::size_t>();
  return g;
}

json to_json(const ObjectBox& b) {
  return {{"id", b.id},
          {"tier", b.tier},
          {"row", b.row},
          {"col", b.col},
          {"box", to_json(b.box)},
          {"unpadded", to_json(b.unpadded)},
          {"provenance",
           {{"cell", {{"x", {b.cell_x0, b.cell_x1}}, {"y", {b.cell_y0, b.cell_y1}}}},
            {"slab", to_json(b.slab)},
            {"tier_rotation_deg", b.tier_rotation_deg},
            {"pad", b.pad},
            {"geometry", to_json(b.geometry)}}}};
}

ObjectBox object_box_from_json(const json& j) {
  ObjectBox b;
  b.id = j.at("id").get<std::string>();
  b.tier = j.at("tier").get<int>();
  b.row = j.at("row").get<int>();
  b.col = j.at("col").get<int>();
  b.box = box_range_from_json(j.at("box"));
  b.unpadded = box_range_from_json(j.at("unpadded"));
  const json& p = j.at("provenance");
  b.cell_x0 = p.at("cell").at("x")[0].get<double>();
  b.cell_x1 = p.at("cell").at("x")[1].get<double>();
  b.cell_y0 = p.at("cell").at("y")[0].get<double>();
  b.cell_y1 = p.at("cell").at("y")[1].get<double>();
  b.slab = slab_from_json(p.at("slab"));
  b.tier_rotation_deg = p.at("tier_rotation_deg").get<double>();
  b.pad = p.at("pad").get<double>();
  b.geometry = geometry_from_json(p.at("geometry"));
  return b;
}

json to_json(const Histogram& h) { return {{"edges", h.edges}, {"counts", h.counts}}; }

}  // namespace ctpack
