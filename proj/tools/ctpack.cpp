// ctpack: packed micro-CT scan -> one named surface mesh per object.
#include <cctype>
#include <charconv>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ctpack/config.hpp"
#include "ctpack/error.hpp"
#include "ctpack/metadata.hpp"
#include "ctpack/server.hpp"
#include "ctpack/session.hpp"
#include "ctpack/synth.hpp"

namespace {

using namespace ctpack;

std::size_t parse_bytes(const std::string& text) {
  std::size_t pos = 0;
  double value = 0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    fail(Errc::InvalidArgument, "bad memory size '" + text + "'");
  }
  std::string unit = text.substr(pos);
  for (char& c : unit) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (!unit.empty() && unit.back() == 'B') unit.pop_back();
  if (unit.size() == 2 && unit[1] == 'I') unit.pop_back();
  double mult = 1;
  if (unit == "K") mult = 1024.0;
  else if (unit == "M") mult = 1024.0 * 1024;
  else if (unit == "G") mult = 1024.0 * 1024 * 1024;
  else if (unit == "T") mult = 1024.0 * 1024 * 1024 * 1024;
  else if (!unit.empty()) fail(Errc::InvalidArgument, "bad memory unit in '" + text + "'");
  if (value <= 0) fail(Errc::InvalidArgument, "memory size must be positive");
  return static_cast<std::size_t>(value * mult);
}

struct PipelineArgs {
  std::string scan_dir;
  std::string layout;
  std::string config;
  std::string out = "ctpack_out";
  std::string max_memory = "16G";
  std::size_t workers = 0;
  std::optional<double> isolevel;
  std::optional<double> pad;
  bool force = false;
};

void add_pipeline_flags(CLI::App* cmd, PipelineArgs& a) {
  cmd->add_option("--scan-dir", a.scan_dir, "Directory of z-slice images")->required();
  cmd->add_option("--layout", a.layout, "Scan-layout CSV")->required();
  cmd->add_option("--config", a.config, "Per-scan decision file (TOML)");
  cmd->add_option("--out", a.out, "Output directory")->capture_default_str();
  cmd->add_option("--max-memory", a.max_memory, "Memory budget, e.g. 16G")->capture_default_str();
  cmd->add_option("--workers", a.workers, "Surfacing workers (0 = CPUs)");
  cmd->add_option("--isolevel", a.isolevel, "Surface isolevel (default b_divider)");
  cmd->add_option("--pad", a.pad, "Box padding in subsampled units (default 3)");
}

Session open_session(const PipelineArgs& a) {
  SessionOptions o;
  o.scan_dir = a.scan_dir;
  o.layout = a.layout;
  o.out = a.out;
  o.memory_budget = parse_bytes(a.max_memory);
  o.workers = a.workers;
  o.isolevel = a.isolevel;
  o.pad = a.pad;
  Session session(o);
  if (!a.config.empty()) session.apply_config(load_config(a.config));
  return session;
}

int run_pipeline(const PipelineArgs& a, Step through) {
  Session session = open_session(a);
  if (a.force && session.is_done(through)) session.invalidate_from(through);
  const SessionReport report = session.run(through);
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << report.to_json().dump(2) << std::endl;
  return report.failures.empty() ? 0 : 3;
}

ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segment a packed micro-CT scan into one surface mesh per object"};
  app.require_subcommand(1);

  // pipeline steps
  PipelineArgs args;
  for (Step step : all_steps()) {
    const std::string name(to_string(step));
    CLI::App* cmd = app.add_subcommand(name, "Run the pipeline through the '" + name + "' step");
    add_pipeline_flags(cmd, args);
    cmd->add_flag("--force", args.force, "Re-run the step even if its output exists");
    cmd->callback([&args, step] { std::exit(run_pipeline(args, step)); });
  }
  CLI::App* run = app.add_subcommand("run", "Run every step through surfacing");
  add_pipeline_flags(run, args);
  run->callback([&args] { std::exit(run_pipeline(args, Step::Surface)); });

  // serve
  std::string bind = "127.0.0.1:8765";
  std::string static_dir;
  CLI::App* serve = app.add_subcommand("serve", "Serve the session API for the review UI");
  add_pipeline_flags(serve, args);
  serve->add_option("--bind", bind, "host:port")->capture_default_str();
  serve->add_option("--static", static_dir, "Directory with the review UI bundle");
  serve->callback([&] {
    Session session = open_session(args);
    ServeOptions so = parse_bind(bind);
    so.static_dir = static_dir;
    ApiServer server(session, so);
    const int port = server.bind();
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "serving on http://" << so.host << ":" << port << "\n";
    server.listen();
    g_server = nullptr;
  });

  // synth
  std::string synth_out = "synthetic_scan";
  std::uint64_t seed = 1;
  std::size_t tiers = 3;
  std::size_t size = 600;
  std::string format = "tiff";
  std::optional<double> offset;
  std::size_t synth_workers = 0;
  CLI::App* synth = app.add_subcommand("synth", "Write a ground-truthed synthetic packed scan");
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("--tiers", tiers, "Number of tiers (3 = acceptance scene)")->capture_default_str();
  synth->add_option("--size", size, "Slice width and height")->capture_default_str();
  synth->add_option("--format", format, "tiff or png")->capture_default_str();
  synth->add_option("--offset", offset, "Global intensity offset (default: drawn from the seed)");
  synth->add_option("--workers", synth_workers, "Threads (0 = CPUs)");
  synth->callback([&] {
    SceneSpec spec = (tiers == 3 && size == 600) ? default_scene(seed) : small_scene(tiers, seed, size);
    spec.format = format;
    spec.workers = synth_workers;
    if (offset) spec.offset = *offset;
    const SynthOutput out = generate(spec, synth_out);
    const GroundTruth& t = out.truth;
    // a ready-to-use decision file with the generator's alignment and thresholds
    save_alignment(std::filesystem::path(synth_out) / "alignment.txt", t.alignment);
    std::FILE* f = std::fopen((std::filesystem::path(synth_out) / "config.toml").string().c_str(), "w");
    if (f) {
      std::fprintf(f, "alignment = \"alignment.txt\"\n\n[thresholds]\na_divider = %.17g\nb_divider = %.17g\na_object = %.17g\n",
                   t.thresholds.a_divider, t.thresholds.b_divider, t.thresholds.a_object);
      std::fclose(f);
    }
    std::cout << nlohmann::json{{"slices", out.slice_dir.string()},
                                {"layout", out.layout_csv.string()},
                                {"truth", out.truth_json.string()},
                                {"config", (std::filesystem::path(synth_out) / "config.toml").string()},
                                {"objects", t.objects.size()},
                                {"offset", t.offset}}
                     .dump(2)
              << std::endl;
  });

  // score
  std::string truth_file;
  std::string score_out = "ctpack_out";
  CLI::App* score = app.add_subcommand("score", "Score computed boxes and meshes against synthetic ground truth");
  score->add_option("--truth", truth_file, "truth.json written by synth")->required();
  score->add_option("--out", score_out, "Pipeline output directory")->capture_default_str();
  score->callback([&] {
    const GroundTruth truth = GroundTruth::load(truth_file);
    std::vector<ObjectBox> boxes;
    const nlohmann::json boxes_doc = read_json_file(std::filesystem::path(score_out) / "meta" / "boxes.json");
    for (const auto& b : boxes_doc.at("boxes"))
      boxes.push_back(object_box_from_json(b));
    const ScoreReport report = score_boxes(truth, boxes);
    nlohmann::json j = report.to_json();
    const auto surface = std::filesystem::path(score_out) / "meta" / "surface.json";
    if (std::filesystem::exists(surface)) {
      std::size_t inside = 0, total = 0;
      const nlohmann::json reports_doc = read_json_file(surface);
      for (const auto& r : reports_doc.at("reports")) {
        if (r.at("status") != "ok") continue;
        ++total;
        const auto c = r.at("centroid_mm");
        const double s = 1000.0 / truth.voxel_pitch_um;
        if (truth.cell_contains(r.at("identifier").get<std::string>(),
                                {c[0].get<double>() * s, c[1].get<double>() * s, c[2].get<double>() * s}))
          ++inside;
      }
      j["meshes"] = {{"count", total}, {"centroid_in_cell", inside}};
    }
    std::cout << j.dump(2) << std::endl;
    std::exit(report.perfect() ? 0 : 3);
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::MissingDecision ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
