#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coloc/error.hpp"
#include "coloc/pipeline.hpp"
#include "coloc/synthetic.hpp"

namespace {

void add_common(CLI::App* cmd, coloc::RunConfig& cfg) {
  cmd->add_option("--manifest", cfg.manifest, "Dataset manifest (JSON)")->required();
  cmd->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Seed for k-means")->capture_default_str();
  cmd->add_option("--workers", cfg.workers, "Parallel image workers")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_selection(CLI::App* cmd, coloc::RunConfig& cfg) {
  cmd->add_option("--k-clusters", cfg.k_clusters, "k for kernel k-means")->capture_default_str();
  cmd->add_option("--rank", cfg.rank, "Which ranked cluster to take (1 = CCFs)")->capture_default_str();
  cmd->add_option("--top-k", cfg.top_k, "Take this many consecutive ranked clusters starting at --rank")
      ->capture_default_str();
}

void add_localize(CLI::App* cmd, coloc::RunConfig& cfg, bool with_ccf) {
  if (with_ccf) {
    cmd->add_option_function<std::string>(
        "--ccf", [&cfg](const std::string& p) { cfg.ccf = p; }, "CCF set (default <out>/ccf.json)");
  }
  cmd->add_option("--mu", cfg.mu, "Geodesic diffusion scale")->capture_default_str();
  cmd->add_option("--threshold", cfg.threshold, "Global threshold on the object-likelihood map")
      ->capture_default_str();
  cmd->add_option("--superpixels", cfg.superpixels, "Target superpixel count")->capture_default_str();
  cmd->add_option("--compactness", cfg.compactness, "SLIC compactness")->capture_default_str();
  cmd->add_flag_callback("--no-propagation", [&cfg] { cfg.propagation_enabled = false; },
                         "Skip geodesic distance propagation");
  cmd->add_flag("--largest-component", cfg.largest_component, "Box only the largest above-threshold component");
  cmd->add_flag("--dump-maps", cfg.dump_maps, "Write likelihood and label maps under <out>/maps");
}

void add_eval(CLI::App* cmd, coloc::RunConfig& cfg) {
  cmd->add_option("--iou-threshold", cfg.iou_threshold, "IoU must exceed this to count as correct")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object co-localization with category-consistent CNN features and geodesic propagation"};
  app.require_subcommand(1);

  coloc::RunConfig cfg;
  auto* select = app.add_subcommand("select-ccf", "Cluster kernels and write <out>/ccf.json");
  add_common(select, cfg);
  add_selection(select, cfg);

  auto* localize = app.add_subcommand("localize", "Localize every image and write <out>/results.json");
  add_common(localize, cfg);
  add_localize(localize, cfg, true);

  auto* eval = app.add_subcommand("eval", "Score <out>/results.json and write report.json / report.csv");
  add_common(eval, cfg);
  add_eval(eval, cfg);

  auto* all = app.add_subcommand("all", "select-ccf, localize and eval in sequence");
  add_common(all, cfg);
  add_selection(all, cfg);
  add_localize(all, cfg, false);
  add_eval(all, cfg);

  std::string synth_dir;
  std::string synth_class = "synthetic";
  std::size_t synth_images = 20;
  std::uint64_t synth_seed = 0;
  bool synth_partial = false;
  auto* synth = app.add_subcommand("synth", "Generate a planted-object dataset");
  synth->add_option("--out", synth_dir, "Dataset directory")->required();
  synth->add_option("--class", synth_class, "Class name")->capture_default_str();
  synth->add_option("--images", synth_images, "Image count")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  synth->add_flag("--partial", synth_partial, "Planted activation covers only one corner of each object");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      coloc::SyntheticOptions options;
      if (synth_partial) options.coverage = coloc::PlantedCoverage::Partial;
      const auto dataset = coloc::make_synthetic_dataset(synth_class, synth_images, options, synth_seed);
      std::cout << coloc::write_synthetic_dataset(dataset, synth_dir).string() << '\n';
      return 0;
    }
    if (select->parsed() || all->parsed()) coloc::cmd_select_ccf(cfg, std::cout);
    if (localize->parsed() || all->parsed()) coloc::cmd_localize(cfg, std::cout);
    if (eval->parsed() || all->parsed()) coloc::cmd_eval(cfg, std::cout);
  } catch (const coloc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
