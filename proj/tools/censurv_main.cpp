#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "censurv/config.hpp"
#include "censurv/errors.hpp"
#include "censurv/experiments.hpp"

namespace {

// Exit codes: 0 success, 2 config error, 3 untrainable objective, 4 I/O error.
int dispatch(const std::string& command, const std::string& config_path,
             const censurv::CliOverrides& ov) {
  try {
    const censurv::Config cfg = censurv::Config::from_file(config_path);
    if (command == "generate")
      censurv::run_generate(cfg, ov);
    else if (command == "train")
      censurv::run_train(cfg, ov);
    else if (command == "evaluate")
      censurv::run_evaluate(cfg, ov);
    else
      censurv::run_sweep(cfg, ov);
    return 0;
  } catch (const censurv::UntrainableError& e) {
    std::cerr << "untrainable: " << e.what() << "\n";
    return 3;
  } catch (const censurv::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const censurv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"censurv: discrete-time survival analysis experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::int64_t seed_override = -1;

  for (const std::string name : {"generate", "train", "evaluate", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "TOML or JSON config file")->required();
    sub->add_option("--out", out_override, "output directory (overrides the config)");
    sub->add_option("--seed", seed_override, "random seed (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  censurv::CliOverrides ov;
  if (!out_override.empty()) ov.out = out_override;
  if (seed_override >= 0) ov.seed = static_cast<std::uint64_t>(seed_override);
  return dispatch(app.get_subcommands().front()->get_name(), config_path, ov);
}
