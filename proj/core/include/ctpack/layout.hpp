#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctpack {

/// One grid cell of a packed tier: an object identifier, or empty.
class CellEntry {
 public:
  CellEntry() = default;
  explicit CellEntry(std::string id) : id_(std::move(id)) {}

  static CellEntry empty_cell() { return CellEntry{}; }

  [[nodiscard]] bool is_empty() const noexcept { return !id_.has_value(); }
  [[nodiscard]] const std::string& id() const { return id_.value(); }

  bool operator==(const CellEntry&) const = default;

 private:
  std::optional<std::string> id_;
};

struct TierLayout {
  int tier_index = 0;  // 1-based, tier 1 is the bottom of the scan
  std::vector<std::vector<CellEntry>> rows;

  [[nodiscard]] std::size_t n_rows() const noexcept { return rows.size(); }
  [[nodiscard]] std::size_t n_cols() const noexcept { return rows.empty() ? 0 : rows.front().size(); }
  [[nodiscard]] std::size_t empty_count() const;
  [[nodiscard]] std::size_t occupied_count() const { return n_rows() * n_cols() - empty_count(); }

  bool operator==(const TierLayout&) const = default;
};

struct ScanLayout {
  std::string scan_id;
  std::vector<TierLayout> tiers;  // bottom tier first

  [[nodiscard]] std::size_t tier_count() const noexcept { return tiers.size(); }
  [[nodiscard]] std::size_t total_cells() const;
  [[nodiscard]] std::size_t occupied_count() const;
  [[nodiscard]] const TierLayout& tier(int tier_index) const;

  /// 1-based (tier, row, col) lookup; throws OutOfBounds.
  [[nodiscard]] const CellEntry& lookup(int tier, int row, int col) const;

  /// Every identifier in tier/row/column order.
  [[nodiscard]] std::vector<std::string> identifiers() const;

  bool operator==(const ScanLayout&) const = default;
};

/// Parses `scan_id,tier,row,id_1,...,id_M` lines. Blank fields and the token
/// EMPTY (any case) mark empty cells. An optional header line is recognised by
/// a non-numeric tier field.
ScanLayout parse_layout(std::string_view csv_text);
ScanLayout load_layout(const std::string& path);

std::string serialize_layout(const ScanLayout& layout);

struct TierSymmetry {
  int tier_index = 0;
  bool rotation_180 = false;
  bool mirror_horizontal = false;  // left-right flip
  bool mirror_vertical = false;    // top-bottom flip
  std::size_t empty_cells = 0;

  [[nodiscard]] bool symmetric() const noexcept {
    return rotation_180 || mirror_horizontal || mirror_vertical;
  }
};

struct SymmetryReport {
  std::vector<TierSymmetry> tiers;

  /// Human-readable warnings: symmetric tiers and tiers with fewer than two
  /// empty cells. Empty when every tier has a unique orientation.
  [[nodiscard]] std::vector<std::string> warnings() const;
};

/// Checks each tier's occupancy pattern against 180-degree rotation and
/// horizontal / vertical mirroring. Depends only on occupancy, never on the
/// identifiers themselves.
SymmetryReport validate_asymmetry(const ScanLayout& layout);

}  // namespace ctpack
