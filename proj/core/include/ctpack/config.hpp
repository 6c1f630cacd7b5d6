#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ctpack/alignment.hpp"
#include "ctpack/segmentation.hpp"

namespace ctpack {

/// Parses the small TOML subset used by scan configs: `[table]` and
/// `[table.sub]` headers, `key = value` with strings, numbers, booleans,
/// `inf`, and flat arrays of those; `#` comments. Returns nested objects.
nlohmann::json parse_toml(std::string_view text);

/// Per-scan decisions for a headless run.
///
///     alignment = "alignment.txt"   # the 5-value file, relative to the config
///     isolevel = 21000              # optional, default b_divider
///     pad = 3
///     voxel_pitch_um = 50           # optional, default from scan.json
///
///     [thresholds]
///     a_divider = 8000
///     b_divider = 19000
///     a_object = 19000
///
///     [overrides]
///     tier_cuts = [26, 51]
///
///     [overrides.grid.2]
///     row_cuts = [12.5, 80, 147, 214]
struct ScanConfig {
  std::optional<AlignmentParams> alignment;
  std::optional<ThresholdSet> thresholds;
  std::optional<std::vector<std::size_t>> tier_cuts;
  std::map<int, GridOverride> grid_cuts;  // by tier index
  std::optional<double> isolevel;
  std::optional<double> pad;
  std::optional<double> voxel_pitch_um;
};

ScanConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ScanConfig load_config(const std::filesystem::path& file);

}  // namespace ctpack
