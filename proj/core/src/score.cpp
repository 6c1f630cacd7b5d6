#include <map>

#include "ctpack/error.hpp"
#include "ctpack/synth.hpp"

namespace ctpack {

ScoreReport score_boxes(const GroundTruth& truth, const std::vector<ObjectBox>& boxes) {
  std::map<std::string, const ObjectBox*> by_id;
  for (const ObjectBox& b : boxes) {
    if (!truth.has_object(b.id)) fail(Errc::UnknownIdentifier, "box for unknown object '" + b.id + "'");
    by_id[b.id] = &b;
  }
  ScoreReport report;
  report.truth_objects = truth.objects.size();
  for (const TruthObject& o : truth.objects) {
    ObjectScore s;
    s.id = o.id;
    auto it = by_id.find(o.id);
    if (it != by_id.end()) {
      const BoxRange& box = it->second->box;
      s.contained = box.contains(o.extent);
      const Vec3 mid{0.5 * static_cast<double>(box.x0 + box.x1) - 0.5, 0.5 * static_cast<double>(box.y0 + box.y1) - 0.5,
                     0.5 * static_cast<double>(box.z0 + box.z1) - 0.5};
      s.centroid_in_cell = truth.cell_contains(o.id, mid);
      if (o.extent.voxels() > 0)
        s.volume_ratio = static_cast<double>(box.voxels()) / static_cast<double>(o.extent.voxels());
    }
    if (s.contained) ++report.contained;
    report.objects.push_back(s);
  }
  report.recall = report.truth_objects ? static_cast<double>(report.contained) / static_cast<double>(report.truth_objects) : 1.0;
  return report;
}

nlohmann::json ScoreReport::to_json() const {
  nlohmann::json j;
  j["truth_objects"] = truth_objects;
  j["contained"] = contained;
  j["recall"] = recall;
  j["objects"] = nlohmann::json::array();
  for (const ObjectScore& s : objects) {
    j["objects"].push_back({{"id", s.id},
                            {"contained", s.contained},
                            {"centroid_in_cell", s.centroid_in_cell},
                            {"volume_ratio", s.volume_ratio}});
  }
  return j;
}

}  // namespace ctpack
