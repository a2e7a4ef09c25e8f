#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coloc/results.hpp"
#include "coloc/tensor_store.hpp"

namespace coloc {

/// Intersection over union of half-open boxes.
double iou(const Box& a, const Box& b);

struct ImageScore {
  std::string id;
  double best_iou = 0.0;
  bool correct = false;
};

struct CorLocReport {
  std::string class_name;
  std::size_t n_images = 0;
  std::size_t n_correct = 0;
  double corloc = 0.0;  // percent
  double iou_threshold = 0.5;
  std::vector<ImageScore> per_image;  // manifest order
};

/// An image is correct when its best IoU against any gt box is strictly
/// greater than `iou_threshold`. Missing boxes score 0 and stay in the
/// denominator.
CorLocReport corloc(std::span<const ImagePrediction> results, const DatasetManifest& manifest,
                    double iou_threshold = 0.5);

nlohmann::ordered_json to_json(const CorLocReport& report);
std::string csv_header();
std::string csv_row(const CorLocReport& report);

}  // namespace coloc
