#include "ctpack/server.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <httplib.h>

#include "ctpack/error.hpp"
#include "ctpack/metadata.hpp"

namespace ctpack {
namespace {

using json = nlohmann::json;

ApiResponse error_response(int status, std::string_view code, const std::string& message) {
  return {status, {{"error", std::string(code)}, {"message", message}}};
}

int status_for(Errc code) {
  switch (code) {
    case Errc::MissingDecision:
    case Errc::NotFinalized:
      return 409;
    case Errc::IoError:
    case Errc::WriteError:
      return 500;
    default:
      return 400;
  }
}

double query_number(const std::map<std::string, std::string>& q, const std::string& key, double fallback) {
  auto it = q.find(key);
  if (it == q.end()) return fallback;
  double v = 0;
  auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc() || p != it->second.data() + it->second.size())
    fail(Errc::InvalidArgument, "query parameter " + key + " is not a number");
  return v;
}

std::size_t query_index(const std::map<std::string, std::string>& q, const std::string& key, std::size_t fallback) {
  const double v = query_number(q, key, static_cast<double>(fallback));
  if (v < 0 || v != std::floor(v)) fail(Errc::InvalidArgument, "query parameter " + key + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

json image_json(const Image2D<double>& img) {
  std::vector<double> pixels(img.pixels().begin(), img.pixels().end());
  return {{"width", img.width()}, {"height", img.height()}, {"pixels", pixels}};
}

// Integer-factor block average so neither side exceeds `max_size`.
Image2D<double> downscale(const Image2D<double>& img, std::size_t max_size, std::size_t& factor) {
  factor = std::max<std::size_t>(1, (std::max(img.width(), img.height()) + max_size - 1) / max_size);
  if (factor == 1) return img;
  const std::size_t w = (img.width() + factor - 1) / factor;
  const std::size_t h = (img.height() + factor - 1) / factor;
  Image2D<double> out(w, h);
  Image2D<double> count(w, h);
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      out(x / factor, y / factor) += img(x, y);
      count(x / factor, y / factor) += 1.0;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] /= count.pixels()[i];
  return out;
}

}  // namespace

ApiResponse SessionApi::get(std::string_view path, const std::map<std::string, std::string>& query) {
  std::lock_guard lock(mutex_);
  try {
    return get_locked(path, query);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "InternalError", e.what());
  }
}

ApiResponse SessionApi::post(std::string_view path, const json& body) {
  std::unique_lock submit(post_mutex_, std::try_to_lock);
  if (!submit.owns_lock()) return error_response(409, "Busy", "another submission is in progress");
  std::lock_guard lock(mutex_);
  try {
    return post_locked(path, body);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "ParseError", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "InternalError", e.what());
  }
}

ApiResponse SessionApi::get_locked(std::string_view path, const std::map<std::string, std::string>& query) {
  if (path == "/api/session") return {200, session_.state()};

  if (path == "/api/histogram") {
    const std::size_t bins = query_index(query, "bins", kHistogramBins);
    if (bins == 0) fail(Errc::InvalidArgument, "bins must be positive");
    const Histogram h = session_.volume_histogram(bins);
    json j = to_json(h);
    j["bins"] = h.counts.size();
    if (auto t = session_.thresholds()) j["thresholds"] = to_json(*t);
    return {200, j};
  }

  if (path == "/api/slice") {
    const SliceStack& stack = session_.stack();
    const std::size_t k = query_index(query, "k", (stack.depth() + 1) / 2);
    AlignmentParams params = session_.alignment().value_or(AlignmentParams::identity(stack.width(), stack.height()));
    const bool raw = query.count("raw") && query.at("raw") != "0";
    if (raw) params = AlignmentParams::identity(stack.width(), stack.height());
    params.angle_deg = query_number(query, "angle", params.angle_deg);
    params.rows.start = query_index(query, "row_start", params.rows.start);
    params.rows.stop = query_index(query, "row_stop", params.rows.stop);
    params.cols.start = query_index(query, "col_start", params.cols.start);
    params.cols.stop = query_index(query, "col_stop", params.cols.stop);
    params.validate(stack.width(), stack.height());
    const ResidentSlice slice = stack.read(k);
    const Image2D<double> aligned = rotate_crop(*slice, params);
    std::size_t factor = 1;
    const Image2D<double> preview = downscale(aligned, kMaxPreview, factor);
    json j = image_json(preview);
    const auto [lo, hi] = std::minmax_element(preview.pixels().begin(), preview.pixels().end());
    j["k"] = k;
    j["alignment"] = to_json(params);
    j["downscale"] = factor;
    j["min"] = *lo;
    j["max"] = *hi;
    j["source"] = {{"width", stack.width()}, {"height", stack.height()}, {"depth", stack.depth()}};
    return {200, j};
  }

  if (path == "/api/zprofile") {
    const std::vector<double> profile = z_profile(session_.subsampled().data);
    json j = {{"profile", profile}, {"min_width", kTierMinWidth}, {"n_tiers", session_.layout().tier_count()}};
    try {
      const TierDetection d = session_.tier_detection(session_.tier_cut_override());
      json peaks = json::array();
      for (const Peak& p : d.candidates) peaks.push_back(to_json(p));
      json slabs = json::array();
      for (const TierSlab& s : d.slabs) slabs.push_back(to_json(s));
      j["candidates"] = peaks;
      j["detected_cuts"] = d.detected_cuts;
      j["cuts"] = d.cuts;
      j["slabs"] = slabs;
      j["ratified"] = d.ratified;
    } catch (const Error& e) {
      j["error"] = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
    }
    return {200, j};
  }

  constexpr std::string_view tiers_prefix = "/api/tiers/";
  constexpr std::string_view divider_suffix = "/divider";
  if (path.starts_with(tiers_prefix) && path.ends_with(divider_suffix)) {
    const std::string_view num = path.substr(tiers_prefix.size(), path.size() - tiers_prefix.size() - divider_suffix.size());
    int tier = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), tier);
    if (ec != std::errc() || p != num.data() + num.size()) return error_response(404, "NotFound", "bad tier number");
    const TierLayout& layout = session_.layout().tier(tier);
    const auto thresholds = session_.thresholds();
    if (!thresholds) fail(Errc::MissingDecision, "thresholds are needed for the divider image");
    std::vector<TierSlab> slabs;
    if (session_.is_done(Step::Tiers))
      slabs = session_.slabs();
    else
      slabs = session_.tier_detection(session_.tier_cut_override()).slabs;
    const TierSlab slab = slabs.at(static_cast<std::size_t>(tier - 1));
    const DividerImage div = divider_image(session_.subsampled().data, slab, *thresholds);
    const RotationSweep sweep = auto_rotate(div.mask);
    const Image2D<double> rotated = rotate_image(div.mask, sweep.angle_deg);
    json j = {{"tier", tier},
              {"slab", to_json(slab)},
              {"score", image_json(div.score)},
              {"mask", image_json(div.mask)},
              {"rotated_mask", image_json(rotated)},
              {"rotation",
               {{"angle_deg", sweep.angle_deg},
                {"best_sample_deg", sweep.best_sample_deg},
                {"angles", sweep.angles},
                {"objective", sweep.objective},
                {"smoothed", sweep.smoothed}}},
              {"row_projection", row_projection(rotated)},
              {"col_projection", col_projection(rotated)},
              {"rows", layout.n_rows()},
              {"cols", layout.n_cols()}};
    try {
      const auto overrides = session_.grid_overrides();
      auto it = overrides.find(tier);
      j["cuts"] = to_json(grid_segment(rotated, layout.n_rows(), layout.n_cols(), sweep.angle_deg,
                                       it == overrides.end() ? GridOverride{} : it->second));
    } catch (const Error& e) {
      j["error"] = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
    }
    return {200, j};
  }
  return error_response(404, "NotFound", "no GET endpoint " + std::string(path));
}

ApiResponse SessionApi::post_locked(std::string_view path, const json& body) {
  if (path == "/api/alignment") {
    session_.set_alignment(alignment_from_json(body));
    return {200, session_.state()};
  }
  if (path == "/api/thresholds") {
    session_.set_thresholds(thresholds_from_json(body));
    return {200, session_.state()};
  }
  if (path == "/api/tier-cuts") {
    const json& cuts = body.at("cuts");
    session_.set_tier_cuts(cuts.is_null() ? std::nullopt
                                          : std::optional<std::vector<std::size_t>>(cuts.get<std::vector<std::size_t>>()));
    return {200, session_.state()};
  }
  if (path == "/api/grid-cuts") {
    GridOverride g;
    if (body.contains("row_cuts") && !body.at("row_cuts").is_null())
      g.row_cuts = body.at("row_cuts").get<std::vector<double>>();
    if (body.contains("col_cuts") && !body.at("col_cuts").is_null())
      g.col_cuts = body.at("col_cuts").get<std::vector<double>>();
    session_.set_grid_cuts(body.at("tier").get<int>(), g);
    return {200, session_.state()};
  }
  if (path == "/api/parameters") {
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
      return body.at(key).get<double>();
    };
    if (body.contains("isolevel")) session_.set_isolevel(opt("isolevel"));
    if (body.contains("pad")) session_.set_pad(opt("pad"));
    if (body.contains("voxel_pitch_um")) session_.set_voxel_pitch(opt("voxel_pitch_um"));
    return {200, session_.state()};
  }
  if (path == "/api/run") {
    if (body.contains("step")) {
      session_.run_step(step_from_string(body.at("step").get<std::string>()));
      return {200, session_.state()};
    }
    const Step through = step_from_string(body.value("through", std::string("surface")));
    const SessionReport report = session_.run(through);
    return {200, {{"report", report.to_json()}, {"session", session_.state()}}};
  }
  return error_response(404, "NotFound", "no POST endpoint " + std::string(path));
}

// ---------------------------------------------------------------------------

ServeOptions parse_bind(std::string_view bind) {
  ServeOptions o;
  std::string_view port = bind;
  const std::size_t colon = bind.rfind(':');
  if (colon != std::string_view::npos) {
    if (colon > 0) o.host = std::string(bind.substr(0, colon));
    port = bind.substr(colon + 1);
  }
  int p = 0;
  auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), p);
  if (ec != std::errc() || end != port.data() + port.size() || p < 0 || p > 65535)
    fail(Errc::InvalidArgument, "bad bind address '" + std::string(bind) + "'");
  o.port = p;
  return o;
}

ApiServer::ApiServer(Session& session, ServeOptions options)
    : api_(session), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server_->Get(R"(/api/.*)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    reply(res, api_.get(req.path, query));
  });
  server_->Post(R"(/api/.*)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    json body = json::object();
    if (!req.body.empty()) {
      body = json::parse(req.body, nullptr, false);
      if (body.is_discarded()) {
        reply(res, error_response(400, "ParseError", "request body is not JSON"));
        return;
      }
    }
    reply(res, api_.post(req.path, body));
  });
  if (!options_.static_dir.empty()) server_->set_mount_point("/", options_.static_dir.string());
}

ApiServer::~ApiServer() = default;

int ApiServer::bind() {
  if (port_ >= 0) return port_;
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else {
    port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ < 0) fail(Errc::IoError, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  return port_;
}

void ApiServer::listen() {
  bind();
  server_->listen_after_bind();
}

void ApiServer::stop() { server_->stop(); }

}  // namespace ctpack
