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

#pragma once

// The CLI subcommands as library calls. Each writes its artifacts under the
// configured output directory and returns a one-object JSON summary.

#include <string_view>
#include <vector>

#include "json.hpp"
#include "treenerv/run_config.hpp"

namespace treenerv {

const std::vector<std::string_view>& command_names();

// Throws std::invalid_argument for an unknown command.
nlohmann::json run_command(std::string_view command, const RunConfig& config);

nlohmann::json cmd_synth(const RunConfig& config);
nlohmann::json cmd_fit(const RunConfig& config);
nlohmann::json cmd_reconstruct(const RunConfig& config);
nlohmann::json cmd_interpolate(const RunConfig& config);
nlohmann::json cmd_compress(const RunConfig& config);
nlohmann::json cmd_decompress(const RunConfig& config);
nlohmann::json cmd_analyze(const RunConfig& config);

}  // namespace treenerv
