#include "coloc/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "coloc/error.hpp"

namespace coloc {

double iou(const Box& a, const Box& b) {
  const auto ix = std::max<std::int64_t>(0, std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin));
  const auto iy = std::max<std::int64_t>(0, std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin));
  const auto inter = ix * iy;
  const auto uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

CorLocReport corloc(std::span<const ImagePrediction> results, const DatasetManifest& manifest,
                    double iou_threshold) {
  std::unordered_map<std::string, const ImagePrediction*> by_id;
  for (const auto& r : results) {
    if (!manifest.find(r.id)) fail(ErrorCode::UnknownImageId, r.id);
    by_id[r.id] = &r;
  }

  CorLocReport report;
  report.class_name = manifest.class_name;
  report.iou_threshold = iou_threshold;
  for (const auto& entry : manifest.images) {
    const auto it = by_id.find(entry.id);
    if (it == by_id.end()) fail(ErrorCode::MissingResult, entry.id);
    ImageScore score{entry.id, 0.0, false};
    if (const auto& pred = it->second->pred_box) {
      for (const auto& gt : entry.gt_boxes) score.best_iou = std::max(score.best_iou, iou(*pred, gt));
    }
    score.correct = score.best_iou > iou_threshold;
    report.n_correct += score.correct ? 1 : 0;
    report.per_image.push_back(std::move(score));
  }
  report.n_images = report.per_image.size();
  report.corloc = report.n_images == 0
                      ? 0.0
                      : 100.0 * static_cast<double>(report.n_correct) / static_cast<double>(report.n_images);
  return report;
}

nlohmann::ordered_json to_json(const CorLocReport& report) {
  nlohmann::ordered_json doc;
  doc["class_name"] = report.class_name;
  doc["n_images"] = report.n_images;
  doc["n_correct"] = report.n_correct;
  doc["corloc"] = report.corloc;
  doc["iou_threshold"] = report.iou_threshold;
  auto per_image = nlohmann::ordered_json::array();
  for (const auto& s : report.per_image) {
    per_image.push_back({{"id", s.id}, {"best_iou", s.best_iou}, {"correct", s.correct}});
  }
  doc["per_image"] = std::move(per_image);
  return doc;
}

std::string csv_header() { return "class,n,corloc\n"; }

std::string csv_row(const CorLocReport& report) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", report.corloc);
  return report.class_name + "," + std::to_string(report.n_images) + "," + buf + "\n";
}

}  // namespace coloc
