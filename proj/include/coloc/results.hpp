#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coloc/tensor_store.hpp"

namespace coloc {

/// One line of results.json.
struct ImagePrediction {
  std::string id;
  std::optional<Box> pred_box;
  bool degenerate = false;
  std::optional<std::string> error;  // set when the image failed to process

  friend bool operator==(const ImagePrediction&, const ImagePrediction&) = default;
};

std::string results_to_json(const std::vector<ImagePrediction>& predictions);
std::vector<ImagePrediction> results_from_json(const std::string& text);

void save_results(const std::filesystem::path& path, const std::vector<ImagePrediction>& predictions);
std::vector<ImagePrediction> load_results(const std::filesystem::path& path);

}  // namespace coloc
