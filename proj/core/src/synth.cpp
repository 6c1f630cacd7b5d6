#include "ctpack/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

#include "ctpack/error.hpp"
#include "ctpack/metadata.hpp"
#include "ctpack/slice_io.hpp"

namespace ctpack {
namespace {

// Largest twist the truth crop is sized for.
constexpr double kCropTwistDeg = 8.0;

struct ObjectModel {
  int tier = 0, row = 0, col = 0;
  std::string id;
  double cx = 0, cy = 0, cz = 0;
  double sx = 0, sy = 0, sz = 0;
  double phase_u = 0, phase_v = 0;
};

struct TierModel {
  std::size_t z_start = 0, z_stop = 0;
  double twist = 0;
  std::size_t rows = 0, cols = 0;
  std::vector<double> row_walls, col_walls;
  std::vector<int> object_at;  // (row * cols + col) -> object index, -1 for empty
};

enum class Material { Air, Sheet, Divider, Object };

class Scene {
 public:
  explicit Scene(const SceneSpec& spec) : spec_(spec) {
    spec.validate();
    center_ = image_center(spec.width, spec.height);
    half_ = spec.package_size / 2.0;
    const std::size_t n = spec.tiers.size();
    const std::size_t avail = spec.depth - spec.margin_bottom - spec.margin_top - spec.sheet_thickness * (n - 1);
    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ull + 17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](const std::array<double, 2>& r) { return r[0] + (r[1] - r[0]) * unit(rng); };
    int counter = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const SynthTierSpec& ts = spec.tiers[k];
      TierModel t;
      t.z_start = spec.margin_bottom + k * avail / n + k * spec.sheet_thickness;
      t.z_stop = spec.margin_bottom + (k + 1) * avail / n + k * spec.sheet_thickness;
      t.twist = ts.twist_deg;
      t.rows = ts.rows;
      t.cols = ts.cols;
      for (std::size_t r = 0; r <= ts.rows; ++r)
        t.row_walls.push_back(center_.y - half_ + spec.package_size * static_cast<double>(r) / static_cast<double>(ts.rows));
      for (std::size_t c = 0; c <= ts.cols; ++c)
        t.col_walls.push_back(center_.x - half_ + spec.package_size * static_cast<double>(c) / static_cast<double>(ts.cols));
      t.object_at.assign(ts.rows * ts.cols, -1);
      for (std::size_t r = 0; r < ts.rows; ++r) {
        for (std::size_t c = 0; c < ts.cols; ++c) {
          const bool empty = std::find(ts.empties.begin(), ts.empties.end(),
                                       std::pair<int, int>{static_cast<int>(r + 1), static_cast<int>(c + 1)}) !=
                             ts.empties.end();
          if (empty) continue;
          ObjectModel o;
          o.tier = static_cast<int>(k + 1);
          o.row = static_cast<int>(r + 1);
          o.col = static_cast<int>(c + 1);
          char name[32];
          std::snprintf(name, sizeof(name), "_%03d", ++counter);
          o.id = spec.scan_id + name;
          o.cx = 0.5 * (t.col_walls[c] + t.col_walls[c + 1]);
          o.cy = 0.5 * (t.row_walls[r] + t.row_walls[r + 1]);
          o.cz = 0.5 * static_cast<double>(t.z_start + t.z_stop - 1);
          o.sx = draw(spec.semi_x);
          o.sy = draw(spec.semi_y);
          o.sz = draw(spec.semi_z);
          o.phase_u = 2.0 * kPi * unit(rng);
          o.phase_v = 2.0 * kPi * unit(rng);
          t.object_at[r * ts.cols + c] = static_cast<int>(objects_.size());
          objects_.push_back(std::move(o));
        }
      }
      tiers_.push_back(std::move(t));
    }
  }

  const std::vector<ObjectModel>& objects() const { return objects_; }
  const std::vector<TierModel>& tiers() const { return tiers_; }
  Point2 center() const { return center_; }

  /// Material of voxel (x, y, z); `object` receives the object index.
  Material classify(double x, double y, std::size_t z, const TierModel* tier, const Point2& tier_xy,
                    const Point2& aligned_xy, int& object) const {
    object = -1;
    if (tier == nullptr) {
      // sheet or margin
      if (is_sheet(z) && std::abs(aligned_xy.x - center_.x) <= half_ && std::abs(aligned_xy.y - center_.y) <= half_)
        return Material::Sheet;
      return Material::Air;
    }
    (void)x;
    (void)y;
    const double tx = tier_xy.x, ty = tier_xy.y;
    const double ht = spec_.wall_thickness / 2.0;
    const bool in_x = tx >= center_.x - half_ - ht && tx <= center_.x + half_ + ht;
    const bool in_y = ty >= center_.y - half_ - ht && ty <= center_.y + half_ + ht;
    if (!in_x || !in_y) return Material::Air;
    for (double w : tier->col_walls)
      if (std::abs(tx - w) <= ht) return Material::Divider;
    for (double w : tier->row_walls)
      if (std::abs(ty - w) <= ht) return Material::Divider;
    const double cw = spec_.package_size / static_cast<double>(tier->cols);
    const double rh = spec_.package_size / static_cast<double>(tier->rows);
    const auto c = static_cast<long long>(std::floor((tx - (center_.x - half_)) / cw));
    const auto r = static_cast<long long>(std::floor((ty - (center_.y - half_)) / rh));
    if (c < 0 || r < 0 || c >= static_cast<long long>(tier->cols) || r >= static_cast<long long>(tier->rows))
      return Material::Air;
    const int idx = tier->object_at[static_cast<std::size_t>(r) * tier->cols + static_cast<std::size_t>(c)];
    if (idx < 0) return Material::Air;
    const ObjectModel& o = objects_[static_cast<std::size_t>(idx)];
    const double dx = (tx - o.cx) / o.sx;
    const double dy = (ty - o.cy) / o.sy;
    const double dz = (static_cast<double>(z) - o.cz) / o.sz;
    const double r2 = dx * dx + dy * dy + dz * dz;
    const double bound = 1.0 + spec_.perturbation;
    if (r2 > bound * bound) return Material::Air;
    const double len = std::sqrt(r2);
    const double v = len > 0 ? dz / len : 0.0;
    const double u = std::atan2(dy, dx);
    const double wobble = 0.6 * std::sin(3.0 * u + o.phase_u) * std::sqrt(std::max(0.0, 1.0 - v * v)) +
                          0.4 * std::sin(2.5 * kPi * v + o.phase_v);
    if (len > 1.0 + spec_.perturbation * wobble) return Material::Air;
    object = idx;
    return Material::Object;
  }

  const TierModel* tier_at(std::size_t z) const {
    for (const TierModel& t : tiers_)
      if (z >= t.z_start && z < t.z_stop) return &t;
    return nullptr;
  }

  bool is_sheet(std::size_t z) const {
    for (std::size_t k = 0; k + 1 < tiers_.size(); ++k)
      if (z >= tiers_[k].z_stop && z < tiers_[k + 1].z_start) return true;
    return false;
  }

  struct Stats {
    std::size_t x0 = std::numeric_limits<std::size_t>::max(), x1 = 0;
    std::size_t y0 = std::numeric_limits<std::size_t>::max(), y1 = 0;
    std::size_t z0 = std::numeric_limits<std::size_t>::max(), z1 = 0;
    std::uint64_t sx = 0, sy = 0, sz = 0, count = 0;

    void add(std::size_t x, std::size_t y, std::size_t z) {
      x0 = std::min(x0, x); x1 = std::max(x1, x + 1);
      y0 = std::min(y0, y); y1 = std::max(y1, y + 1);
      z0 = std::min(z0, z); z1 = std::max(z1, z + 1);
      sx += x; sy += y; sz += z; ++count;
    }
    void merge(const Stats& o) {
      if (o.count == 0) return;
      x0 = std::min(x0, o.x0); x1 = std::max(x1, o.x1);
      y0 = std::min(y0, o.y0); y1 = std::max(y1, o.y1);
      z0 = std::min(z0, o.z0); z1 = std::max(z1, o.z1);
      sx += o.sx; sy += o.sy; sz += o.sz; count += o.count;
    }
  };

  /// Renders slice z with its own noise stream, accumulating object stats.
  Slice16 render(std::size_t z, std::vector<Stats>* stats) const {
    Slice16 slice(spec_.width, spec_.height);
    std::mt19937_64 rng(spec_.seed ^ (0xD1B54A32D192ED03ull * (z + 1)));
    std::normal_distribution<double> noise(0.0, 1.0);
    const TierModel* tier = tier_at(z);
    const double tier_angle = -(spec_.global_rotation_deg + (tier ? tier->twist : 0.0));
    for (std::size_t y = 0; y < spec_.height; ++y) {
      for (std::size_t x = 0; x < spec_.width; ++x) {
        const Point2 p{static_cast<double>(x), static_cast<double>(y)};
        const Point2 aligned = rotate_point(p, -spec_.global_rotation_deg, center_);
        const Point2 tier_xy = tier ? rotate_point(p, tier_angle, center_) : aligned;
        int object = -1;
        const Material m = classify(p.x, p.y, z, tier, tier_xy, aligned, object);
        const IntensityClass& cls = m == Material::Air       ? spec_.air
                                    : m == Material::Sheet   ? spec_.sheet
                                    : m == Material::Divider ? spec_.divider
                                                             : spec_.object;
        double value = cls.mean + spec_.offset;
        const double n = noise(rng);
        if (cls.sigma > 0) value += cls.sigma * n;
        slice(x, y) = static_cast<std::uint16_t>(std::clamp(std::round(value), 0.0, 65535.0));
        if (object >= 0 && stats) (*stats)[static_cast<std::size_t>(object)].add(x, y, z);
      }
    }
    return slice;
  }

 private:
  const SceneSpec& spec_;
  Point2 center_;
  double half_ = 0;
  std::vector<TierModel> tiers_;
  std::vector<ObjectModel> objects_;
};

std::string slice_name(std::size_t z, std::size_t depth, const std::string& format) {
  const int digits = std::max(4, static_cast<int>(std::to_string(depth).size()));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "slice_%0*zu", digits, z + 1);
  return std::string(buf) + (format == "png" ? ".png" : ".tif");
}

}  // namespace

void SceneSpec::validate() const {
  auto invalid = [](const std::string& why) { fail(Errc::SpecInvalid, why); };
  if (width < 8 || height < 8 || depth < 2) invalid("scan dims too small");
  if (tiers.empty()) invalid("at least one tier required");
  if (format != "tiff" && format != "png") invalid("format must be tiff or png");
  if (!(air.mean < divider.mean && divider.mean < object.mean)) invalid("class means must be ordered air < divider < object");
  if (divider.mean - air.mean < 3.0 * (air.sigma + divider.sigma))
    invalid("air and divider means closer than 6 sigma");
  if (object.mean - divider.mean < 3.0 * (divider.sigma + object.sigma))
    invalid("divider and object means closer than 6 sigma");
  if (sheet.mean + 3.0 * sheet.sigma > 0.5 * (air.mean + divider.mean))
    invalid("sheet intensity reaches the divider range");
  if (air.mean + offset - 6 * air.sigma < 0 || object.mean + offset + 6 * object.sigma > 65535)
    invalid("intensities do not fit 16-bit samples");
  if (voxel_pitch_um <= 0) invalid("voxel pitch must be positive");
  if (perturbation < 0 || perturbation >= 0.5) invalid("perturbation must be in [0, 0.5)");
  const std::size_t n = tiers.size();
  const std::size_t fixed = margin_bottom + margin_top + sheet_thickness * (n - 1);
  if (depth <= fixed + n) invalid("depth too small for the tiers");
  const double tier_h = static_cast<double>(depth - fixed) / static_cast<double>(n);
  const Point2 c = image_center(width, height);
  for (std::size_t k = 0; k < n; ++k) {
    const SynthTierSpec& t = tiers[k];
    if (t.rows < 1 || t.cols < 1) invalid("tier grid must be at least 1 x 1");
    if (std::abs(t.twist_deg) > 10.0) invalid("tier twist outside [-10, 10] degrees");
    for (auto [r, col] : t.empties)
      if (r < 1 || col < 1 || r > static_cast<int>(t.rows) || col > static_cast<int>(t.cols))
        invalid("empty cell outside the tier grid");
    // blobs fit within their cells with a 1 voxel margin
    const double cw = package_size / static_cast<double>(t.cols);
    const double rh = package_size / static_cast<double>(t.rows);
    const double grow = 1.0 + perturbation;
    const double wall = wall_thickness / 2.0 + 1.0;
    if (semi_x[1] * grow + wall > cw / 2.0) invalid("blob x semi-axis does not fit its cell");
    if (semi_y[1] * grow + wall > rh / 2.0) invalid("blob y semi-axis does not fit its cell");
    if (semi_z[1] * grow + 1.0 > tier_h / 2.0) invalid("blob z semi-axis does not fit its tier");
    // package corners stay inside the slice
    const double radius = package_size / 2.0 * std::sqrt(2.0) + wall_thickness;
    const double total = std::abs(global_rotation_deg) + std::abs(t.twist_deg);
    const double reach = radius * std::cos((45.0 - std::min(total, 45.0)) * kPi / 180.0);
    if (reach > std::min(c.x, c.y)) invalid("rotated package leaves the slice");
  }
  if (semi_x[0] <= 0 || semi_y[0] <= 0 || semi_z[0] <= 0 || semi_x[0] > semi_x[1] || semi_y[0] > semi_y[1] ||
      semi_z[0] > semi_z[1])
    invalid("bad semi-axis ranges");
}

SceneSpec default_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  std::mt19937_64 rng(seed * 0xBF58476D1CE4E5B9ull + 3);
  std::uniform_real_distribution<double> twist(-8.0, 8.0);
  std::uniform_real_distribution<double> offset(0.0, 20000.0);
  spec.offset = std::round(offset(rng));
  const std::vector<std::vector<std::pair<int, int>>> empties = {
      {{1, 1}, {1, 2}}, {{2, 4}, {3, 4}}, {{1, 3}, {3, 1}}};
  for (const auto& e : empties) {
    SynthTierSpec t;
    t.empties = e;
    t.twist_deg = std::round(twist(rng) * 10.0) / 10.0;
    spec.tiers.push_back(t);
  }
  return spec;
}

SceneSpec small_scene(std::size_t n_tiers, std::uint64_t seed, std::size_t size) {
  SceneSpec spec = default_scene(seed);
  const std::vector<std::vector<std::pair<int, int>>> empties = {
      {{1, 1}, {1, 2}}, {{2, 4}, {3, 4}}, {{1, 3}, {3, 1}}, {{3, 2}, {3, 3}}};
  std::vector<SynthTierSpec> tiers;
  for (std::size_t k = 0; k < n_tiers; ++k) {
    SynthTierSpec t = k < spec.tiers.size() ? spec.tiers[k] : spec.tiers[k % spec.tiers.size()];
    t.empties = empties[k % empties.size()];
    if (k >= spec.tiers.size()) t.twist_deg = -t.twist_deg / 2.0;
    tiers.push_back(t);
  }
  spec.tiers = tiers;
  const double f = static_cast<double>(size) / static_cast<double>(spec.width);
  spec.width = size;
  spec.height = size;
  spec.package_size = std::round(spec.package_size * f);
  for (auto* r : {&spec.semi_x, &spec.semi_y}) {
    (*r)[0] *= f;
    (*r)[1] *= f;
  }
  // default tier height (about 251 slices) regardless of tier count
  spec.depth = spec.margin_bottom + spec.margin_top + n_tiers * 251 + (n_tiers - 1) * spec.sheet_thickness;
  return spec;
}

ScanLayout scene_layout(const SceneSpec& spec) {
  const Scene scene(spec);
  ScanLayout layout;
  layout.scan_id = spec.scan_id;
  for (std::size_t k = 0; k < scene.tiers().size(); ++k) {
    const TierModel& t = scene.tiers()[k];
    TierLayout tl;
    tl.tier_index = static_cast<int>(k + 1);
    for (std::size_t r = 0; r < t.rows; ++r) {
      std::vector<CellEntry> row;
      for (std::size_t c = 0; c < t.cols; ++c) {
        const int idx = t.object_at[r * t.cols + c];
        row.push_back(idx < 0 ? CellEntry::empty_cell() : CellEntry(scene.objects()[static_cast<std::size_t>(idx)].id));
      }
      tl.rows.push_back(std::move(row));
    }
    layout.tiers.push_back(std::move(tl));
  }
  return layout;
}

Slice16 render_slice(const SceneSpec& spec, std::size_t z) {
  if (z >= spec.depth) fail(Errc::OutOfRange, "slice index beyond scene depth");
  const Scene scene(spec);
  return scene.render(z, nullptr);
}

SynthOutput generate(const SceneSpec& spec, const std::filesystem::path& out_dir) {
  const Scene scene(spec);
  SynthOutput out;
  out.slice_dir = out_dir / "slices";
  out.layout_csv = out_dir / "layout.csv";
  out.truth_json = out_dir / "truth.json";
  std::error_code ec;
  std::filesystem::create_directories(out.slice_dir, ec);
  if (ec) fail(Errc::IoError, "cannot create " + out.slice_dir.string() + ": " + ec.message());
  // stale slices from an earlier, deeper scene would join the stack
  for (const auto& entry : std::filesystem::directory_iterator(out.slice_dir))
    if (is_slice_file(entry.path())) std::filesystem::remove(entry.path());

  std::size_t workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, spec.depth);
  std::vector<std::vector<Scene::Stats>> partial(workers, std::vector<Scene::Stats>(scene.objects().size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t z = next++; z < spec.depth; z = next++) {
        const Slice16 slice = scene.render(z, &partial[w]);
        const auto file = out.slice_dir / slice_name(z, spec.depth, spec.format);
        if (spec.format == "png")
          write_slice_png(file, slice);
        else
          write_slice_tiff(file, slice);
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next = spec.depth;
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  write_json_file(out.slice_dir / "scan.json",
                  {{"scan_id", spec.scan_id}, {"voxel_pitch_um", spec.voxel_pitch_um}});
  {
    std::ofstream csv(out.layout_csv, std::ios::binary | std::ios::trunc);
    csv << serialize_layout(scene_layout(spec));
    if (!csv) fail(Errc::IoError, "cannot write " + out.layout_csv.string());
  }

  GroundTruth& truth = out.truth;
  truth.scan_id = spec.scan_id;
  truth.width = spec.width;
  truth.height = spec.height;
  truth.depth = spec.depth;
  truth.global_rotation_deg = spec.global_rotation_deg;
  truth.voxel_pitch_um = spec.voxel_pitch_um;
  truth.offset = spec.offset;
  truth.wall_thickness = spec.wall_thickness;
  truth.thresholds.a_divider = 0.5 * (spec.air.mean + spec.divider.mean) + spec.offset;
  truth.thresholds.b_divider = 0.5 * (spec.divider.mean + spec.object.mean) + spec.offset;
  truth.thresholds.a_object = truth.thresholds.b_divider;
  {
    const double t = kCropTwistDeg * kPi / 180.0;
    const auto half = static_cast<std::size_t>(std::ceil(spec.package_size / 2.0 * (std::cos(t) + std::sin(t)))) + 1;
    const auto crop = [&](std::size_t dim) {
      const std::size_t mid = dim / 2;
      return PixelRange{mid > half ? mid - half : 0, std::min(dim, mid + half)};
    };
    truth.alignment = {-spec.global_rotation_deg, crop(spec.height), crop(spec.width)};
  }
  const auto& tiers = scene.tiers();
  for (std::size_t k = 0; k < tiers.size(); ++k) {
    const TierModel& t = tiers[k];
    truth.tiers.push_back({static_cast<int>(k + 1), t.z_start, t.z_stop, t.twist, t.rows, t.cols, t.row_walls,
                           t.col_walls});
    if (k + 1 < tiers.size())
      truth.gap_centers.push_back(0.5 * static_cast<double>(t.z_stop + tiers[k + 1].z_start));
  }
  for (std::size_t i = 0; i < scene.objects().size(); ++i) {
    const ObjectModel& o = scene.objects()[i];
    Scene::Stats s;
    for (const auto& p : partial) s.merge(p[i]);
    TruthObject to;
    to.id = o.id;
    to.tier = o.tier;
    to.row = o.row;
    to.col = o.col;
    to.center = {o.cx, o.cy, o.cz};
    to.semi_axes = {o.sx, o.sy, o.sz};
    to.voxel_count = s.count;
    if (s.count > 0) {
      to.extent = {s.x0, s.x1, s.y0, s.y1, s.z0, s.z1};
      const auto n = static_cast<double>(s.count);
      to.centroid = {static_cast<double>(s.sx) / n, static_cast<double>(s.sy) / n, static_cast<double>(s.sz) / n};
    }
    truth.objects.push_back(to);
  }
  write_json_file(out.truth_json, truth.to_json());
  return out;
}

// ---------------------------------------------------------------------------
// GroundTruth

bool GroundTruth::has_object(const std::string& id) const {
  return std::any_of(objects.begin(), objects.end(), [&](const TruthObject& o) { return o.id == id; });
}

const TruthObject& GroundTruth::object(const std::string& id) const {
  for (const TruthObject& o : objects)
    if (o.id == id) return o;
  fail(Errc::UnknownIdentifier, "no ground-truth object '" + id + "'");
}

Point2 GroundTruth::to_tier_frame(int tier, Point2 scan_xy) const {
  const TruthTier& t = tiers.at(static_cast<std::size_t>(tier - 1));
  return rotate_point(scan_xy, -(global_rotation_deg + t.twist_deg), image_center(width, height));
}

bool GroundTruth::cell_contains(const std::string& id, Vec3 p) const {
  const TruthObject& o = object(id);
  const TruthTier& t = tiers.at(static_cast<std::size_t>(o.tier - 1));
  const Point2 q = to_tier_frame(o.tier, {p.x, p.y});
  const auto r = static_cast<std::size_t>(o.row - 1);
  const auto c = static_cast<std::size_t>(o.col - 1);
  return q.x > t.col_walls[c] && q.x < t.col_walls[c + 1] && q.y > t.row_walls[r] && q.y < t.row_walls[r + 1] &&
         p.z >= static_cast<double>(t.z_start) && p.z < static_cast<double>(t.z_stop);
}

std::pair<std::vector<double>, std::vector<double>> GroundTruth::subsampled_walls(int tier, std::size_t size) const {
  const TruthTier& t = tiers.at(static_cast<std::size_t>(tier - 1));
  // The tier frame and the aligned frame share the slice centre, and the crop
  // is centred on it, so rotation-corrected walls sit at crop position / scale.
  const double sx = static_cast<double>(alignment.cols.size()) / static_cast<double>(size);
  const double sy = static_cast<double>(alignment.rows.size()) / static_cast<double>(size);
  std::pair<std::vector<double>, std::vector<double>> out;
  for (double w : t.row_walls) out.first.push_back((w + 0.5 - static_cast<double>(alignment.rows.start)) / sy);
  for (double w : t.col_walls) out.second.push_back((w + 0.5 - static_cast<double>(alignment.cols.start)) / sx);
  return out;
}

nlohmann::json GroundTruth::to_json() const {
  nlohmann::json j;
  j["scan_id"] = scan_id;
  j["dims"] = {width, height, depth};
  j["global_rotation_deg"] = global_rotation_deg;
  j["voxel_pitch_um"] = voxel_pitch_um;
  j["offset"] = offset;
  j["wall_thickness"] = wall_thickness;
  j["thresholds"] = ctpack::to_json(thresholds);
  j["alignment"] = ctpack::to_json(alignment);
  j["gap_centers"] = gap_centers;
  j["tiers"] = nlohmann::json::array();
  for (const TruthTier& t : tiers) {
    j["tiers"].push_back({{"tier", t.tier},
                          {"z_start", t.z_start},
                          {"z_stop", t.z_stop},
                          {"twist_deg", t.twist_deg},
                          {"rows", t.rows},
                          {"cols", t.cols},
                          {"row_walls", t.row_walls},
                          {"col_walls", t.col_walls}});
  }
  j["objects"] = nlohmann::json::array();
  for (const TruthObject& o : objects) {
    j["objects"].push_back({{"id", o.id},
                            {"tier", o.tier},
                            {"row", o.row},
                            {"col", o.col},
                            {"center", o.center},
                            {"semi_axes", o.semi_axes},
                            {"extent", ctpack::to_json(o.extent)},
                            {"centroid", o.centroid},
                            {"voxel_count", o.voxel_count}});
  }
  return j;
}

GroundTruth GroundTruth::from_json(const nlohmann::json& j) {
  GroundTruth g;
  try {
    g.scan_id = j.at("scan_id").get<std::string>();
    const auto dims = j.at("dims");
    g.width = dims.at(0).get<std::size_t>();
    g.height = dims.at(1).get<std::size_t>();
    g.depth = dims.at(2).get<std::size_t>();
    g.global_rotation_deg = j.at("global_rotation_deg").get<double>();
    g.voxel_pitch_um = j.at("voxel_pitch_um").get<double>();
    g.offset = j.at("offset").get<double>();
    g.wall_thickness = j.at("wall_thickness").get<double>();
    g.thresholds = thresholds_from_json(j.at("thresholds"));
    g.alignment = alignment_from_json(j.at("alignment"));
    g.gap_centers = j.at("gap_centers").get<std::vector<double>>();
    for (const auto& t : j.at("tiers")) {
      g.tiers.push_back({t.at("tier").get<int>(), t.at("z_start").get<std::size_t>(),
                         t.at("z_stop").get<std::size_t>(), t.at("twist_deg").get<double>(),
                         t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>(),
                         t.at("row_walls").get<std::vector<double>>(), t.at("col_walls").get<std::vector<double>>()});
    }
    for (const auto& o : j.at("objects")) {
      TruthObject to;
      to.id = o.at("id").get<std::string>();
      to.tier = o.at("tier").get<int>();
      to.row = o.at("row").get<int>();
      to.col = o.at("col").get<int>();
      to.center = o.at("center").get<std::array<double, 3>>();
      to.semi_axes = o.at("semi_axes").get<std::array<double, 3>>();
      to.extent = box_range_from_json(o.at("extent"));
      to.centroid = o.at("centroid").get<std::array<double, 3>>();
      to.voxel_count = o.at("voxel_count").get<std::uint64_t>();
      g.objects.push_back(std::move(to));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("truth json: ") + e.what());
  }
  return g;
}

GroundTruth GroundTruth::load(const std::filesystem::path& file) { return from_json(read_json_file(file)); }

}  // namespace ctpack
