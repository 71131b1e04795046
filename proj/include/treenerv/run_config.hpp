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

// JSON run configuration shared by every CLI command.

#include <cstdint>
#include <filesystem>
#include <optional>

#include "json.hpp"
#include "treenerv/container.hpp"
#include "treenerv/decoder.hpp"
#include "treenerv/trainer.hpp"
#include "treenerv/video.hpp"

namespace treenerv {

struct SynthSpec {
  SynthKind kind = SynthKind::kStaticDynamic;
  std::size_t length = 64;
  std::size_t height = 32;
  std::size_t width = 64;
  std::size_t channels = 3;
  std::uint64_t seed = 0;
};

struct RunConfig {
  // Exactly one of the two video sources, or neither for model-only commands.
  std::optional<std::filesystem::path> frames_dir;
  std::optional<SynthSpec> synth;
  DecoderConfig decoder;
  TrainConfig train;
  std::filesystem::path out = "out";
  // Written by fit; read by reconstruct, interpolate, compress and analyze.
  std::optional<std::filesystem::path> model;
  CompressOptions compress;
  // Written by compress, read by decompress.
  std::optional<std::filesystem::path> compressed;

  std::filesystem::path model_path() const { return model.value_or(out / "model.tnrv"); }
  std::filesystem::path compressed_path() const {
    return compressed.value_or(out / "model_q.tnrv");
  }

  bool has_video() const { return frames_dir || synth; }
  // Throws ConfigError when no video source is configured.
  VideoSequence load_video() const;

  // Relative paths are resolved against `base`.
  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base = {});
  static RunConfig load(const std::filesystem::path& file);
};

}  // namespace treenerv
