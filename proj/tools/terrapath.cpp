// terrapath command-line entry point.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "terrapath/commands.hpp"

int main(int argc, char** argv) {
  using namespace terrapath;
  CLI::App app{"Terrain-aware multi-drone mission refinement and coverage evaluation"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("-j,--threads", threads, "Worker threads (0 = all hardware threads)")
      ->capture_default_str();

  std::optional<std::string> config_flag;

  auto* plan = app.add_subcommand("plan", "Lawnmower coverage paths over the configured roi");
  std::string plan_out;
  plan->add_option("-c,--config", config_flag, "Configuration file (default: $MISSION_CONFIG)");
  plan->add_option("-o,--output", plan_out, "Output path document")->required();

  auto* refine = app.add_subcommand("refine", "Terrain-follow and orient existing paths");
  std::string paths_in, cloud_in, refine_out;
  refine->add_option("-p,--paths", paths_in, "Input path document (JSON)")->required();
  refine->add_option("--cloud", cloud_in, "Pre-scan point cloud (PLY or XYZ)")->required();
  refine->add_option("-c,--config", config_flag, "Configuration file (default: $MISSION_CONFIG)");
  refine->add_option("-o,--output", refine_out, "Output mission document")->required();

  auto* eval = app.add_subcommand("eval", "Precision, recall and F1 of a cloud against truth");
  std::string recon_in, truth_in, eval_json, eval_label = "reconstruction";
  std::vector<double> thresholds{0.05, 0.10};
  eval->add_option("-r,--reconstructed", recon_in, "Reconstructed cloud")->required();
  eval->add_option("-t,--truth", truth_in, "Reference cloud")->required();
  eval->add_option("--threshold", thresholds, "Distance thresholds in meters")
      ->capture_default_str();
  eval->add_option("-o,--output", eval_json, "JSON report path (default: stdout)");
  eval->add_option("--label", eval_label, "Method name in the report")->capture_default_str();

  auto* scene = app.add_subcommand("scene", "Generate a synthetic point cloud");
  SceneSpec spec;
  std::string kind = "plane", scene_out;
  bool ascii = false;
  scene->add_option("-k,--kind", kind, "plane | ramp | box-on-plane | pile | staircase")
      ->capture_default_str();
  scene->add_option("--size-x", spec.size_x, "Extent along x (m)")->capture_default_str();
  scene->add_option("--size-y", spec.size_y, "Extent along y (m)")->capture_default_str();
  scene->add_option("--height", spec.height, "Box/pile height or stair rise (m)")
      ->capture_default_str();
  scene->add_option("--feature-size", spec.feature_size,
                    "Box side, pile diameter or stair tread (m)")
      ->capture_default_str();
  scene->add_option("--slope", spec.slope, "Ramp slope dz/dx")->capture_default_str();
  scene->add_option("--density", spec.density, "Points per square meter")->capture_default_str();
  scene->add_option("--seed", spec.seed, "Jitter seed")->capture_default_str();
  scene->add_option("--jitter", spec.jitter, "In-surface jitter, fraction of grid cell")
      ->capture_default_str();
  scene->add_flag("--ascii", ascii, "Write ASCII PLY instead of binary");
  scene->add_option("-o,--output", scene_out, "Output PLY path")->required();

  auto* config = app.add_subcommand("config", "Configuration utilities");
  config->require_subcommand(1);
  auto* show = config->add_subcommand("show", "Print the resolved configuration as JSON");
  show->add_option("-c,--config", config_flag, "Configuration file (default: $MISSION_CONFIG)");

  CLI11_PARSE(app, argc, argv);

  auto config_path = [&]() -> std::optional<std::filesystem::path> {
    try {
      return resolve_config_path(config_flag);
    } catch (const InputError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return std::nullopt;
    }
  };

  CommandOutcome outcome;
  if (*plan) {
    auto cfg = config_path();
    if (!cfg) return kExitInput;
    outcome = cmd_plan(*cfg, plan_out, std::cerr);
  } else if (*refine) {
    auto cfg = config_path();
    if (!cfg) return kExitInput;
    outcome = cmd_refine(paths_in, cloud_in, *cfg, refine_out, threads, std::cerr);
  } else if (*eval) {
    std::optional<std::filesystem::path> json_out;
    if (!eval_json.empty()) json_out = eval_json;
    outcome = cmd_eval(recon_in, truth_in, thresholds, json_out, threads, std::cout, std::cerr,
                       eval_label);
  } else if (*scene) {
    try {
      spec.kind = parse_scene_kind(kind);
    } catch (const InputError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInput;
    }
    outcome = cmd_scene(spec, scene_out, ascii, std::cerr);
  } else if (*show) {
    auto cfg = config_path();
    if (!cfg) return kExitInput;
    outcome = cmd_config_show(*cfg, std::cout, std::cerr);
  }
  return outcome.exit_code;
}
