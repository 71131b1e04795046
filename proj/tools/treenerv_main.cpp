// Copyright 2026 The TreeNeRV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "treenerv/commands.hpp"
#include "treenerv/container.hpp"
#include "treenerv/huffman.hpp"
#include "treenerv/log.hpp"
#include "treenerv/run_config.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kCorrupt = 4,
  kTraining = 5,
};

int fail(ExitCode code, const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-structured neural video representation"};
  std::string command;
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::string names;
  for (std::string_view n : treenerv::command_names()) {
    names += names.empty() ? "" : "|";
    names += n;
  }
  app.add_option("command", command, names)->required();
  app.add_option("--config", config_path, "run configuration (JSON)")->required();
  app.add_option("--out", out, "output directory, overrides the config");
  app.add_option("--seed", seed, "training seed, overrides the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  try {
    treenerv::init_logging();
    treenerv::RunConfig config = treenerv::RunConfig::load(config_path);
    if (out) config.out = *out;
    if (seed) config.train.seed = *seed;
    bool known = false;
    for (std::string_view n : treenerv::command_names()) known = known || n == command;
    if (!known) return fail(kUsage, "usage", "unknown command '" + command + "'");
    std::cout << treenerv::run_command(command, config).dump() << '\n';
    return kOk;
  } catch (const treenerv::ContainerError& e) {
    return fail(kCorrupt, "container", e.what());
  } catch (const treenerv::DecodeError& e) {
    return fail(kCorrupt, "container", e.what());
  } catch (const treenerv::TrainingError& e) {
    return fail(kTraining, "training", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kUsage, "config", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kIo, "io", e.what());
  } catch (const std::runtime_error& e) {
    return fail(kIo, "io", e.what());
  } catch (const std::exception& e) {
    return fail(kFailure, "internal", e.what());
  }
}
