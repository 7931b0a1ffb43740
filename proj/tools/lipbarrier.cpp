#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lipbarrier/error.hpp"
#include "lipbarrier/experiment.hpp"

int main(int argc, char** argv) {
  using namespace lipbarrier;

  CLI::App app{"Barrier construction and Lipschitz-bound verification for nonstandard-growth integrands"};
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> x0;
  app.add_option("command", command, "growth-check | barrier | solve | verify-all")
      ->required()
      ->check(CLI::IsMember({"growth-check", "barrier", "solve", "verify-all"}));
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--x0", x0, "touching point 'x,y'; repeatable, overrides barrier.x0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  ExperimentConfig config;
  try {
    config = load_config(config_path);
    if (seed) config.seed = *seed;
    if (!x0.empty()) {
      config.barrier.x0.clear();
      for (const std::string& p : x0) {
        const auto comma = p.find(',');
        if (comma == std::string::npos) fail(ErrorKind::config, "--x0 expects 'x,y', got '" + p + "'");
        config.barrier.x0.push_back({std::stod(p.substr(0, comma)), std::stod(p.substr(comma + 1))});
      }
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error [config]: malformed --x0 value\n";
    return kConfigError;
  }
  return run_command(command, config, out_dir, std::cout);
}
