#pragma once

#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "ctpack/session.hpp"
#include "ctpack/synth.hpp"
#include "support.hpp"

namespace test {

/// A two-tier 240 px scan generated once per process.
struct SmallScan {
  TempDir dir{"scan"};
  ctpack::SynthOutput out;

  SmallScan() {
    ctpack::SceneSpec spec = ctpack::small_scene(2, 4, 240);
    spec.workers = 1;
    out = ctpack::generate(spec, dir / "synth");
  }

  ctpack::SessionOptions options(const std::filesystem::path& out_dir) const {
    ctpack::SessionOptions o;
    o.scan_dir = out.slice_dir;
    o.layout = out.layout_csv;
    o.out = out_dir;
    o.workers = 1;
    return o;
  }

  /// Config text carrying the truth decisions.
  std::string config_text() const {
    const auto& a = out.truth.alignment;
    const auto& t = out.truth.thresholds;
    std::ostringstream s;
    s.precision(17);
    s << "alignment = [" << a.angle_deg << ", " << a.rows.start << ", " << a.rows.stop << ", " << a.cols.start
      << ", " << a.cols.stop << "]\n"
      << "pad = 3\n"
      << "[thresholds]\n"
      << "a_divider = " << t.a_divider << "\nb_divider = " << t.b_divider << "\na_object = " << t.a_object << "\n";
    return s.str();
  }
};

inline const SmallScan& small_scan() {
  static const SmallScan scan;
  return scan;
}

inline std::string file_bytes(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace test
