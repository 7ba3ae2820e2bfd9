#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "polycarl.h"

namespace {

struct ContextGuard {
  pcl_context* ctx = pcl_context_new();
  ~ContextGuard() { pcl_context_free(ctx); }
};

int report(pcl_context* ctx, pcl_status s) {
  if (s == PCL_OK) return 0;
  const std::string field = pcl_error_field(ctx);
  std::fprintf(stderr, "polycarl: %s\n", pcl_last_error(ctx));
  if (s == PCL_RESOURCE && pcl_resource_estimate(ctx) > 0)
    std::fprintf(stderr, "polycarl: estimate %.6g exceeds the budget\n", pcl_resource_estimate(ctx));
  if (s == PCL_IO || s == PCL_INTERNAL) return 1;
  return static_cast<int>(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reproducible studies for the polynomial Carleson tile machinery"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pcl_version());

  auto* list = app.add_subcommand("list", "Print the study names");

  std::string study, config_path, out_dir, seed;
  int grid_bits = -1;
  bool json_only = false;
  auto* run = app.add_subcommand("run", "Run one study and write its artifacts");
  run->add_option("study", study, "vdc, levelset, nets, decompose, interact, mass, stopping, trees or rows")
      ->required();
  run->add_option("--config", config_path, "Config file with key = value lines");
  run->add_option("--out", out_dir, "Artifact directory");
  run->add_option("--seed", seed, "Study seed (unsigned 64-bit)");
  run->add_option("--grid-bits", grid_bits, "Grid points per axis as a power of two")->check(CLI::NonNegativeNumber);
  run->add_flag("--json-only", json_only, "Write only the JSON summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*list) {
    for (std::size_t i = 0; i < pcl_study_count(); ++i) std::printf("%s\n", pcl_study_name(i));
    return 0;
  }

  ContextGuard g;
  if (!g.ctx) {
    std::fprintf(stderr, "polycarl: cannot allocate a context\n");
    return 3;
  }
  pcl_status s = PCL_OK;
  if (!config_path.empty() && (s = pcl_config_load(g.ctx, config_path.c_str())) != PCL_OK) return report(g.ctx, s);
  auto set = [&](const char* key, const std::string& value) {
    if (s == PCL_OK) s = pcl_config_set(g.ctx, key, value.c_str());
  };
  if (!out_dir.empty()) set("out", out_dir);
  if (!seed.empty()) set("seed", seed);
  if (grid_bits >= 0) set("grid_bits", std::to_string(grid_bits));
  if (json_only) set("json_only", "true");
  if (s != PCL_OK) return report(g.ctx, s);

  s = pcl_run(g.ctx, study.c_str());
  if (s == PCL_OK || s == PCL_ASSERTION) {
    for (std::size_t i = 0; i < pcl_artifact_count(g.ctx); ++i) std::printf("wrote %s\n", pcl_artifact_path(g.ctx, i));
    std::printf("%s: %s\n", study.c_str(), s == PCL_OK ? "pass" : "FAIL");
  }
  return report(g.ctx, s);
}
