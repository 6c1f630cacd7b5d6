#pragma once

#include <filesystem>

#include <json.hpp>

#include "ctpack/alignment.hpp"
#include "ctpack/segmentation.hpp"

namespace ctpack {

using json = nlohmann::json;

/// Pretty-printed (2-space) JSON with a trailing newline. Output is a pure
/// function of the value, so equal decisions give byte-identical sidecars.
void write_json_file(const std::filesystem::path& file, const json& value);
json read_json_file(const std::filesystem::path& file);

json to_json(const AlignmentParams& p);
AlignmentParams alignment_from_json(const json& j);

/// b_object = +inf is written as null.
json to_json(const ThresholdSet& t);
ThresholdSet thresholds_from_json(const json& j);

json to_json(const TierSlab& s);
TierSlab slab_from_json(const json& j);

json to_json(const Peak& p);

json to_json(const GridCuts& g);
GridCuts grid_cuts_from_json(const json& j);

json to_json(const BoxRange& b);
BoxRange box_range_from_json(const json& j);

json to_json(const ScanGeometry& g);
ScanGeometry geometry_from_json(const json& j);

json to_json(const ObjectBox& b);
ObjectBox object_box_from_json(const json& j);

json to_json(const Histogram& h);

}  // namespace ctpack
