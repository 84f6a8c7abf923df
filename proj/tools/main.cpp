#include <iostream>

#include "CLI11.hpp"
#include "synthpop/cli.hpp"
#include "synthpop/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Population synthesis experiments: preprocess, train, generate, evaluate, sweep, synth-data"};
  app.require_subcommand(1, 1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  for (const auto& name : synthpop::cli::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--out", out, "output directory")->capture_default_str();
  }
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto inv = synthpop::cli::Invocation::from_file(config, seed, out);
    const auto result = synthpop::cli::run_command(command, inv);
    for (const auto& m : result.messages) std::cerr << m << '\n';
    for (const auto& p : result.outputs) std::cout << p.string() << '\n';
  } catch (const synthpop::ConfigError& e) {
    std::cerr << "synthpop " << command << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "synthpop " << command << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
