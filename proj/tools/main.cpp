// Command-line driver for the transverse-electric DG solver.
//
// Usage: tedg <command> --config <path> [--set key=value ...]
// Exit codes: 0 success, 2 config validation, 3 numerical blow-up,
// 4 iteration non-convergence, 5 file I/O, 1 anything else.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <tedg/tedg.hpp>

namespace {

struct CommandArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"transverse-electric discontinuous Galerkin solver"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"mesh-info", "report element counts and shape quality of a mesh"},
      {"convergence-space", "mesh-refinement study of the manufactured scenario"},
      {"convergence-time", "time-step refinement study of the manufactured scenario"},
      {"scatter", "scattered-field simulation with snapshot and probe outputs"},
      {"run", "single simulation run with snapshot outputs"}};

  std::vector<CommandArgs> args(commands.size());
  std::vector<CLI::App*> subs;
  for (size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, commands[i].second);
    sub->add_option("--config", args[i].config_path, "JSON config file")->required();
    sub->add_option("--set", args[i].overrides,
                    "dotted-path override, e.g. --set scheme.alpha=0");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  size_t chosen = 0;
  for (size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) chosen = i;

  try {
    const tedg::RunConfig cfg =
        tedg::load_run_config(args[chosen].config_path, commands[chosen].first,
                              args[chosen].overrides);
    tedg::dispatch(cfg, std::cout);
    return 0;
  } catch (const tedg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const tedg::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const tedg::MeshError& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return 2;
  } catch (const tedg::MaterialError& e) {
    std::cerr << "material error: " << e.what() << '\n';
    return 2;
  } catch (const tedg::BlowupError& e) {
    std::cerr << "blow-up: " << e.what() << '\n';
    return 3;
  } catch (const tedg::NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    return 4;
  } catch (const tedg::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
