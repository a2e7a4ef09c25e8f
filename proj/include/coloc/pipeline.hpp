#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "coloc/ccf.hpp"
#include "coloc/eval.hpp"
#include "coloc/propagation.hpp"
#include "coloc/results.hpp"
#include "coloc/tensor_store.hpp"

namespace coloc {

struct RunConfig {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> ccf;  // defaults to <out>/ccf.json
  std::filesystem::path out = "out";
  std::size_t k_clusters = 5;
  std::size_t rank = 1;
  std::size_t top_k = 1;
  double mu = 1.0;
  double threshold = 0.25;
  std::size_t superpixels = 300;
  double compactness = 10.0;
  std::uint64_t seed = 0;
  bool propagation_enabled = true;
  bool largest_component = false;
  bool dump_maps = false;
  std::size_t workers = 1;
  double iou_threshold = 0.5;

  void validate() const;
  LocalizeParams localize_params() const;
  std::filesystem::path ccf_path() const { return ccf.value_or(out / "ccf.json"); }
  std::filesystem::path results_path() const { return out / "results.json"; }
};

/// Builds A from every image's feature stack, clusters the kernels and picks
/// the requested cluster(s).
struct CcfSelection {
  ActivationMatrix activations;
  KernelClustering clustering;
  CcfSet set;
};
CcfSelection select_ccfs_for_manifest(const DatasetManifest& manifest, std::size_t k_clusters, std::size_t rank,
                                      std::size_t top_k, std::uint64_t seed);

/// Localizes every image on a worker pool. Output is in manifest order;
/// per-image failures are recorded in ImagePrediction::error.
std::vector<ImagePrediction> localize_manifest(const DatasetManifest& manifest, const CcfSet& ccf,
                                               const LocalizeParams& params, std::size_t workers,
                                               const std::optional<std::filesystem::path>& dump_dir = {});

CcfSet cmd_select_ccf(const RunConfig& config, std::ostream& log);
std::vector<ImagePrediction> cmd_localize(const RunConfig& config, std::ostream& log);
CorLocReport cmd_eval(const RunConfig& config, std::ostream& log);

}  // namespace coloc
