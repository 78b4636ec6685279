#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qstab/experiments.hpp"

namespace exp_ = qstab::experiments;

int main(int argc, char** argv) {
  CLI::App app{"qstab - quantum register stabilization simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::int64_t seed_override = -1;
  int threads_override = 0;
  std::string out_override;

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--seed", seed_override, "override the config seed");
  run->add_option("--threads", threads_override, "override the thread count");
  run->add_option("--out", out_override, "override the output directory");

  auto* validate = app.add_subcommand("validate", "validate a JSON config");
  validate->add_option("--config", config_path, "config file")->required();

  app.add_subcommand("list-experiments", "list available experiments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list-experiments")) {
      for (const auto& [name, desc] : exp_::list_experiments())
        std::cout << name << "  -  " << desc << "\n";
      return 0;
    }
    exp_::ExperimentConfig cfg = exp_::parse_config(config_path);
    if (app.got_subcommand("validate")) {
      std::cout << "ok: " << exp_::resolved_json(cfg).dump(2) << "\n";
      return 0;
    }
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (threads_override > 0) cfg.threads = threads_override;
    if (!out_override.empty()) cfg.output_dir = out_override;
    const auto files = exp_::run(cfg);
    for (const auto& f : files) std::cout << f << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
