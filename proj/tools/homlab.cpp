#include "homlab/error.hpp"
#include "homlab/lab.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Curvature numerics for locally homogeneous spaces"};
  std::string config_path;
  std::string out_dir;
  unsigned seed = 0;
  app.add_option("-c,--config", config_path, "experiment config (JSON)")->required();
  auto* out_opt = app.add_option("-o,--out-dir", out_dir, "directory for report files");
  auto* seed_opt = app.add_option("-s,--seed", seed, "random seed override");
  app.set_version_flag("--version", homlab::kVersion);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? homlab::kExitOk : homlab::kExitConfigError;
  }

  homlab::ExperimentConfig cfg;
  try {
    cfg = homlab::load_config(config_path);
  } catch (const homlab::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return homlab::kExitIoError;
  } catch (const homlab::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return homlab::kExitConfigError;
  }
  if (*out_opt) cfg.out_dir = out_dir;
  if (*seed_opt) {
    cfg.seed = seed;
    cfg.raw["seed"] = seed;
  }
  return homlab::run_config(cfg);
}
