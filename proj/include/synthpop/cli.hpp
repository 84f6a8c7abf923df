#pragma once

// Batch subcommands behind the `synthpop` executable. Each takes a parsed JSON
// config plus flag overrides and writes its outputs into one directory.
// Outputs are staged and only moved into place once every file is written.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace synthpop::cli {

struct Invocation {
  nlohmann::json config = nlohmann::json::object();
  // Relative paths in the config resolve against this directory.
  std::filesystem::path base_dir = ".";
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";

  static Invocation from_file(const std::filesystem::path& config_path, std::optional<std::uint64_t> seed,
                              std::filesystem::path out);
};

struct CommandResult {
  std::vector<std::filesystem::path> outputs;  // final locations, in write order
  std::vector<std::string> messages;
};

CommandResult cmd_preprocess(const Invocation& inv);
CommandResult cmd_train(const Invocation& inv);
CommandResult cmd_generate(const Invocation& inv);
CommandResult cmd_evaluate(const Invocation& inv);
CommandResult cmd_sweep(const Invocation& inv);
CommandResult cmd_synth_data(const Invocation& inv);

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"preprocess", "train", "generate", "evaluate", "sweep", "synth-data"};
  return names;
}

/// Dispatches by subcommand name; throws ConfigError for an unknown name.
CommandResult run_command(const std::string& name, const Invocation& inv);

}  // namespace synthpop::cli
