#include "ctpack/layout.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ctpack/error.hpp"

namespace ctpack {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool is_empty_token(std::string_view field) {
  if (field.empty()) return true;
  if (field.size() != 5) return false;
  std::string upper(field);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return upper == "EMPTY";
}

CellEntry make_cell(const std::string& field, int line_no) {
  if (is_empty_token(field)) return CellEntry::empty_cell();
  if (field.find_first_of("/\\") != std::string::npos)
    fail(Errc::ParseError, "line " + std::to_string(line_no) + ": identifier '" + field +
                               "' contains a path separator");
  return CellEntry{field};
}

struct PendingRow {
  int row = 0;
  int line_no = 0;
  std::vector<CellEntry> cells;
};

}  // namespace

std::size_t TierLayout::empty_count() const {
  std::size_t n = 0;
  for (const auto& row : rows)
    for (const auto& cell : row) n += cell.is_empty() ? 1 : 0;
  return n;
}

std::size_t ScanLayout::total_cells() const {
  std::size_t n = 0;
  for (const auto& t : tiers) n += t.n_rows() * t.n_cols();
  return n;
}

std::size_t ScanLayout::occupied_count() const {
  std::size_t n = 0;
  for (const auto& t : tiers) n += t.occupied_count();
  return n;
}

const TierLayout& ScanLayout::tier(int tier_index) const {
  if (tier_index < 1 || static_cast<std::size_t>(tier_index) > tiers.size())
    fail(Errc::OutOfBounds, "tier " + std::to_string(tier_index) + " not in layout");
  return tiers[static_cast<std::size_t>(tier_index - 1)];
}

const CellEntry& ScanLayout::lookup(int tier_index, int row, int col) const {
  const TierLayout& t = tier(tier_index);
  if (row < 1 || static_cast<std::size_t>(row) > t.n_rows() || col < 1 ||
      static_cast<std::size_t>(col) > t.n_cols())
    fail(Errc::OutOfBounds, "cell (" + std::to_string(tier_index) + "," + std::to_string(row) +
                                "," + std::to_string(col) + ") outside tier grid");
  return t.rows[static_cast<std::size_t>(row - 1)][static_cast<std::size_t>(col - 1)];
}

std::vector<std::string> ScanLayout::identifiers() const {
  std::vector<std::string> ids;
  for (const auto& t : tiers)
    for (const auto& row : t.rows)
      for (const auto& cell : row)
        if (!cell.is_empty()) ids.push_back(cell.id());
  return ids;
}

ScanLayout parse_layout(std::string_view csv_text) {
  ScanLayout layout;
  std::map<int, std::vector<PendingRow>> by_tier;
  std::set<std::string> seen;
  bool have_scan_id = false;

  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= csv_text.size()) {
    std::size_t end = csv_text.find('\n', pos);
    if (end == std::string_view::npos) end = csv_text.size();
    std::string_view line = csv_text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (trim(line).empty()) continue;

    auto fields = split_csv_line(line);
    if (fields.size() < 4)
      fail(Errc::ParseError, "line " + std::to_string(line_no) +
                                 ": expected scan_id, tier, row and at least one cell");
    auto tier = parse_int(fields[1]);
    if (!tier) {
      if (by_tier.empty() && !have_scan_id) continue;  // header row
      fail(Errc::ParseError, "line " + std::to_string(line_no) + ": tier field is not an integer");
    }
    auto row = parse_int(fields[2]);
    if (!row || *row < 1)
      fail(Errc::ParseError, "line " + std::to_string(line_no) + ": row field must be a positive integer");

    if (!have_scan_id) {
      layout.scan_id = fields[0];
      have_scan_id = true;
    } else if (fields[0] != layout.scan_id) {
      fail(Errc::ParseError, "line " + std::to_string(line_no) + ": scan id '" + fields[0] +
                                 "' differs from '" + layout.scan_id + "'");
    }

    PendingRow pending{*row, line_no, {}};
    for (std::size_t i = 3; i < fields.size(); ++i) {
      CellEntry cell = make_cell(fields[i], line_no);
      if (!cell.is_empty() && !seen.insert(cell.id()).second)
        fail(Errc::DuplicateIdentifier, cell.id());
      pending.cells.push_back(std::move(cell));
    }
    by_tier[*tier].push_back(std::move(pending));
  }

  if (by_tier.empty()) fail(Errc::EmptyLayout, "no layout rows found");

  int expected = 1;
  for (auto& [tier_index, rows] : by_tier) {
    if (tier_index != expected)
      fail(Errc::NonConsecutiveTiers, "expected tier " + std::to_string(expected) + ", found " +
                                          std::to_string(tier_index));
    ++expected;
    std::stable_sort(rows.begin(), rows.end(),
                     [](const PendingRow& a, const PendingRow& b) { return a.row < b.row; });
    TierLayout tier{tier_index, {}};
    const std::size_t width = rows.front().cells.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].row != static_cast<int>(i) + 1)
        fail(Errc::ParseError, "tier " + std::to_string(tier_index) + ": row numbers must run 1.." +
                                   std::to_string(rows.size()) + " (line " +
                                   std::to_string(rows[i].line_no) + ")");
      if (rows[i].cells.size() != width)
        fail(Errc::RaggedTier, "tier " + std::to_string(tier_index));
      tier.rows.push_back(std::move(rows[i].cells));
    }
    layout.tiers.push_back(std::move(tier));
  }
  return layout;
}

ScanLayout load_layout(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open layout file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_layout(buffer.str());
}

std::string serialize_layout(const ScanLayout& layout) {
  std::ostringstream out;
  for (const auto& tier : layout.tiers) {
    for (std::size_t r = 0; r < tier.rows.size(); ++r) {
      out << layout.scan_id << ',' << tier.tier_index << ',' << (r + 1);
      for (const auto& cell : tier.rows[r]) out << ',' << (cell.is_empty() ? "" : cell.id());
      out << '\n';
    }
  }
  return out.str();
}

std::vector<std::string> SymmetryReport::warnings() const {
  std::vector<std::string> out;
  for (const auto& t : tiers) {
    const std::string prefix = "tier " + std::to_string(t.tier_index) + ": ";
    if (t.empty_cells < 2)
      out.push_back(prefix + "fewer than 2 empty cells (" + std::to_string(t.empty_cells) + ")");
    if (t.symmetric()) {
      std::string which;
      if (t.rotation_180) which += " rotation-180";
      if (t.mirror_horizontal) which += " mirror-horizontal";
      if (t.mirror_vertical) which += " mirror-vertical";
      out.push_back(prefix + "empty-cell pattern is symmetric under" + which +
                    "; orientation cannot be recovered from occupancy");
    }
  }
  return out;
}

SymmetryReport validate_asymmetry(const ScanLayout& layout) {
  SymmetryReport report;
  for (const auto& tier : layout.tiers) {
    const std::size_t n = tier.n_rows();
    const std::size_t m = tier.n_cols();
    auto occupied = [&](std::size_t r, std::size_t c) { return !tier.rows[r][c].is_empty(); };
    TierSymmetry sym{tier.tier_index, true, true, true, tier.empty_count()};
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        const bool here = occupied(r, c);
        if (here != occupied(n - 1 - r, m - 1 - c)) sym.rotation_180 = false;
        if (here != occupied(r, m - 1 - c)) sym.mirror_horizontal = false;
        if (here != occupied(n - 1 - r, c)) sym.mirror_vertical = false;
      }
    }
    report.tiers.push_back(sym);
  }
  return report;
}

}  // namespace ctpack
