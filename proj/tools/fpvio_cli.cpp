// fpvio — focal-plane visual-inertial odometry pipeline.
//
// Subcommands: simulate, run, evaluate, bench. See README.md for the config
// file schema and output formats.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "fpvio/pipeline/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string traj_preset;
  std::string mode;
  std::string out_dir;
  long long seed = -1;
  bool noise_free = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key=value config file");
  cmd->add_option("--traj", flags.traj_preset, "trajectory preset A..H");
  cmd->add_option("--mode", flags.mode, "fusion mode: relative|absolute");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_flag("--noise-free", flags.noise_free, "zero every noise source");
}

fpvio::RunConfig build_config(const CommonFlags& flags) {
  fpvio::RunConfig config;
  if (!flags.config_path.empty()) fpvio::load_config_file(flags.config_path, config);
  if (!flags.traj_preset.empty()) {
    if (flags.traj_preset.size() != 1)
      throw fpvio::ConfigError("--traj expects a single letter A..H");
    fpvio::apply_trajectory_preset(flags.traj_preset[0], config);
  }
  if (!flags.mode.empty()) fpvio::apply_config_entry("fusion.mode", flags.mode, config);
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.seed >= 0)
    fpvio::apply_config_entry("seed", std::to_string(flags.seed), config);
  if (flags.noise_free) fpvio::make_noise_free(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"focal-plane visual-inertial odometry pipeline"};
  app.require_subcommand(1);

  CommonFlags sim_flags, run_flags, bench_flags;
  CLI::App* sim = app.add_subcommand("simulate", "write ground truth, IMU, scene, events");
  add_common(sim, sim_flags);
  CLI::App* run = app.add_subcommand("run", "run VO + fusion on simulated artifacts");
  add_common(run, run_flags);

  std::string est_path, ref_path, eval_out = "out", eval_label = "trajectory";
  CLI::App* evaluate = app.add_subcommand("evaluate", "ATE of an estimate vs reference");
  evaluate->add_option("estimate", est_path, "estimated trajectory (TUM)")->required();
  evaluate->add_option("reference", ref_path, "reference trajectory (TUM)")->required();
  evaluate->add_option("--out", eval_out, "report directory");
  evaluate->add_option("--label", eval_label, "report label");

  double bench_seconds = 10.0;
  CLI::App* bench = app.add_subcommand("bench", "throughput measurement");
  add_common(bench, bench_flags);
  bench->add_option("--seconds", bench_seconds, "simulated data length");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      fpvio::cmd_simulate(build_config(sim_flags));
    } else if (run->parsed()) {
      fpvio::cmd_run(build_config(run_flags));
    } else if (evaluate->parsed()) {
      return fpvio::cmd_evaluate(est_path, ref_path, eval_out, eval_label);
    } else if (bench->parsed()) {
      fpvio::cmd_bench(build_config(bench_flags), bench_seconds);
    }
  } catch (const fpvio::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const fpvio::TrackingLostError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const fpvio::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
