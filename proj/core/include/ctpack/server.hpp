#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ctpack/session.hpp"

namespace httplib {
class Server;
}

namespace ctpack {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// JSON session API, independent of the transport so it can be driven
/// directly in tests. Reads run under the session lock; a POST arriving while
/// another POST is in progress is rejected with 409.
///
///   GET  /api/session                 step states, decisions, scan and layout
///   GET  /api/histogram[?bins=500]    histogram of the subsampled volume
///   GET  /api/slice?k=..              aligned slice preview (<= 1024 px);
///                                     angle,row_start,row_stop,col_start,col_stop
///                                     preview other values, raw=1 skips alignment
///   GET  /api/zprofile                D_k with detected and final tier cuts
///   GET  /api/tiers/<t>/divider       divider mask, rotation sweep, projections, cuts
///   POST /api/alignment               {angle_deg, row_range, col_range}
///   POST /api/thresholds              {a_divider, b_divider, a_object[, b_object]}
///   POST /api/tier-cuts               {cuts: [..] | null}
///   POST /api/grid-cuts               {tier, row_cuts?, col_cuts?}
///   POST /api/parameters              {isolevel?, pad?, voxel_pitch_um?}
///   POST /api/run                     {through: step} or {step: step}
class SessionApi {
 public:
  explicit SessionApi(Session& session) : session_(session) {}

  ApiResponse get(std::string_view path, const std::map<std::string, std::string>& query = {});
  ApiResponse post(std::string_view path, const nlohmann::json& body);

  static constexpr std::size_t kMaxPreview = 1024;

 private:
  ApiResponse get_locked(std::string_view path, const std::map<std::string, std::string>& query);
  ApiResponse post_locked(std::string_view path, const nlohmann::json& body);

  Session& session_;
  std::mutex mutex_;
  std::mutex post_mutex_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8765;  // 0 picks a free port
  std::filesystem::path static_dir;  // review UI bundle, optional
};

/// Parses "host:port", ":port" or "port".
ServeOptions parse_bind(std::string_view bind);

class ApiServer {
 public:
  ApiServer(Session& session, ServeOptions options);
  ~ApiServer();

  /// Binds the socket; returns the bound port.
  int bind();
  /// Serves until stop() is called. Binds first if needed.
  void listen();
  void stop();

 private:
  SessionApi api_;
  ServeOptions options_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = -1;
};

}  // namespace ctpack
