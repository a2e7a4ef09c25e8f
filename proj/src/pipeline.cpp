#include "coloc/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>

#include "coloc/error.hpp"
#include "coloc/image_io.hpp"
#include "coloc/parallel.hpp"

namespace coloc {
namespace {

std::string file_stem_for(const std::string& id) {
  std::string out = id;
  for (auto& c : out) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '_' || c == '.';
    if (!keep) c = '_';
  }
  return out;
}

void dump_maps(const std::filesystem::path& dir, const LocalizationResult& r) {
  const auto stem = file_stem_for(r.id);
  save_tensor(dir / (stem + ".likelihood.ccft"), tensor_from_map(r.likelihood));
  write_pgm(dir / (stem + ".likelihood.pgm"), r.likelihood);
  if (!r.labeling.labels.empty()) {
    ScalarMap labels(r.labeling.labels.height(), r.labeling.labels.width());
    for (std::size_t p = 0; p < labels.size(); ++p) labels[p] = r.labeling.labels[p];
    save_tensor(dir / (stem + ".labels.ccft"), tensor_from_map(labels));
  }
}

}  // namespace

void RunConfig::validate() const {
  if (k_clusters < 1) fail(ErrorCode::InvalidArgument, "--k-clusters must be >= 1");
  if (rank < 1 || rank > k_clusters) fail(ErrorCode::RankOutOfRange, "--rank must lie in [1, k-clusters]");
  if (top_k < 1 || rank + top_k - 1 > k_clusters) {
    fail(ErrorCode::RankOutOfRange, "--rank + --top-k - 1 must not exceed --k-clusters");
  }
  if (workers < 1) fail(ErrorCode::InvalidArgument, "--workers must be >= 1");
  if (!(iou_threshold >= 0.0 && iou_threshold < 1.0)) {
    fail(ErrorCode::InvalidArgument, "--iou-threshold must lie in [0, 1)");
  }
  localize_params().validate();
}

LocalizeParams RunConfig::localize_params() const {
  LocalizeParams p;
  p.mu = mu;
  p.threshold = threshold;
  p.target_count = superpixels;
  p.compactness = compactness;
  p.propagation_enabled = propagation_enabled;
  p.largest_component = largest_component;
  return p;
}

CcfSelection select_ccfs_for_manifest(const DatasetManifest& manifest, std::size_t k_clusters, std::size_t rank,
                                      std::size_t top_k, std::uint64_t seed) {
  // Stream the stacks: only one column of A per image is kept.
  std::vector<std::vector<double>> columns;
  columns.reserve(manifest.images.size());
  for (const auto& entry : manifest.images) {
    const FeatureStack stack(load_tensor(entry.features_path));
    columns.push_back(activation_column(stack));
  }
  CcfSelection out;
  out.activations = build_activation_matrix(columns);
  out.clustering = cluster_kernels(out.activations, k_clusters, seed);
  out.set = select_ccfs(out.clustering, rank, top_k);
  out.set.class_name = manifest.class_name;
  out.set.seed = seed;
  return out;
}

std::vector<ImagePrediction> localize_manifest(const DatasetManifest& manifest, const CcfSet& ccf,
                                               const LocalizeParams& params, std::size_t workers,
                                               const std::optional<std::filesystem::path>& dump_dir) {
  std::vector<ImagePrediction> predictions(manifest.images.size());
  std::mutex collector;
  parallel_for(manifest.images.size(), workers, [&](std::size_t i) {
    const auto& entry = manifest.images[i];
    ImagePrediction prediction;
    prediction.id = entry.id;
    try {
      const auto result = localize_image(load_image_inputs(entry), ccf.kernel_ids, params);
      prediction.pred_box = result.pred_box;
      prediction.degenerate = result.degenerate;
      if (dump_dir) {
        std::lock_guard lock(collector);
        dump_maps(*dump_dir, result);
      }
    } catch (const Error& e) {
      prediction.error = e.what();
    }
    std::lock_guard lock(collector);
    predictions[i] = std::move(prediction);
  });
  return predictions;
}

CcfSet cmd_select_ccf(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto manifest = load_manifest(config.manifest);
  const auto selection =
      select_ccfs_for_manifest(manifest, config.k_clusters, config.rank, config.top_k, config.seed);

  std::filesystem::create_directories(config.out);
  save_ccf_set(config.ccf_path(), selection.set);

  const auto& clustering = selection.clustering;
  log << "class " << manifest.class_name << ": " << selection.activations.kernels() << " kernels x "
      << selection.activations.images() << " images\n";
  log << "rank  cluster  kernels  score\n";
  for (std::size_t r = 0; r < clustering.ranking.size(); ++r) {
    const auto c = clustering.ranking[r];
    char line[96];
    std::snprintf(line, sizeof(line), "%4zu  %7zu  %7zu  %.6g\n", r + 1, c, clustering.members(c).size(),
                  clustering.cluster_scores[c]);
    log << line;
  }
  log << "selected " << selection.set.kernel_ids.size() << " kernels -> " << config.ccf_path().string() << '\n';
  return selection.set;
}

std::vector<ImagePrediction> cmd_localize(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto manifest = load_manifest(config.manifest);
  const auto ccf = load_ccf_set(config.ccf_path());

  std::filesystem::create_directories(config.out);
  std::optional<std::filesystem::path> dump_dir;
  if (config.dump_maps) {
    dump_dir = config.out / "maps";
    std::filesystem::create_directories(*dump_dir);
  }
  const auto predictions = localize_manifest(manifest, ccf, config.localize_params(), config.workers, dump_dir);
  save_results(config.results_path(), predictions);

  std::size_t failed = 0, degenerate = 0;
  for (const auto& p : predictions) {
    if (p.error) {
      ++failed;
      log << "warning: " << p.id << ": " << *p.error << '\n';
    }
    if (p.degenerate) ++degenerate;
  }
  log << "localized " << predictions.size() - failed << "/" << predictions.size() << " images (" << degenerate
      << " degenerate) -> " << config.results_path().string() << '\n';
  return predictions;
}

CorLocReport cmd_eval(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto manifest = load_manifest(config.manifest);
  const auto predictions = load_results(config.results_path());
  const auto report = corloc(predictions, manifest, config.iou_threshold);

  std::filesystem::create_directories(config.out);
  {
    std::ofstream json(config.out / "report.json", std::ios::trunc);
    if (!json) fail(ErrorCode::IoError, "cannot write report.json");
    json << to_json(report).dump(2) << '\n';
  }
  {
    std::ofstream csv(config.out / "report.csv", std::ios::trunc);
    if (!csv) fail(ErrorCode::IoError, "cannot write report.csv");
    csv << csv_header() << csv_row(report);
  }
  char line[128];
  std::snprintf(line, sizeof(line), "%s: CorLoc %.2f%% (%zu/%zu)\n", report.class_name.c_str(), report.corloc,
                report.n_correct, report.n_images);
  log << line;
  return report;
}

}  // namespace coloc
