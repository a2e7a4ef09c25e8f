#include "coloc/results.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coloc/error.hpp"

namespace coloc {

std::string results_to_json(const std::vector<ImagePrediction>& predictions) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& p : predictions) {
    nlohmann::ordered_json item;
    item["id"] = p.id;
    if (p.pred_box) {
      item["pred_box"] = {p.pred_box->xmin, p.pred_box->ymin, p.pred_box->xmax, p.pred_box->ymax};
    } else {
      item["pred_box"] = nullptr;
    }
    item["degenerate"] = p.degenerate;
    if (p.error) item["error"] = *p.error;
    doc.push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

std::vector<ImagePrediction> results_from_json(const std::string& text) {
  std::vector<ImagePrediction> out;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_array()) fail(ErrorCode::ParseError, "results must be a JSON array");
    for (const auto& item : doc) {
      ImagePrediction p;
      p.id = item.at("id").get<std::string>();
      const auto& box = item.at("pred_box");
      if (!box.is_null()) {
        if (!box.is_array() || box.size() != 4) fail(ErrorCode::ParseError, "pred_box must have 4 entries");
        p.pred_box = Box{box[0].get<std::int64_t>(), box[1].get<std::int64_t>(), box[2].get<std::int64_t>(),
                         box[3].get<std::int64_t>()};
        if (!p.pred_box->valid()) fail(ErrorCode::ParseError, "degenerate pred_box for " + p.id);
      }
      p.degenerate = item.at("degenerate").get<bool>();
      if (item.contains("error")) p.error = item["error"].get<std::string>();
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  return out;
}

void save_results(const std::filesystem::path& path, const std::vector<ImagePrediction>& predictions) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << results_to_json(predictions);
}

std::vector<ImagePrediction> load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingFile, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return results_from_json(buffer.str());
}

}  // namespace coloc
