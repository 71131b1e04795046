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

#include "treenerv/run_config.hpp"

#include <fstream>

#include "treenerv/json_fields.hpp"

namespace treenerv {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

SynthSpec parse_synth(const nlohmann::json& j) {
  constexpr std::string_view ctx = "video.synth";
  require_known_keys(j, {"kind", "L", "H", "W", "channels", "seed"}, ctx);
  SynthSpec s;
  const auto kind = read_required<std::string>(j, "kind", ctx);
  const auto parsed = parse_synth_kind(kind);
  if (!parsed) {
    throw ConfigError("video.synth.kind: unknown kind '" + kind +
                      "' (static_dynamic, smooth, piecewise)");
  }
  s.kind = *parsed;
  read_optional(j, "L", s.length, ctx);
  read_optional(j, "H", s.height, ctx);
  read_optional(j, "W", s.width, ctx);
  read_optional(j, "channels", s.channels, ctx);
  read_optional(j, "seed", s.seed, ctx);
  if (s.length < 4) throw ConfigError("video.synth.L must be >= 4");
  if (s.height == 0 || s.width == 0) throw ConfigError("video.synth: H and W must be > 0");
  if (s.channels != 1 && s.channels != 3) throw ConfigError("video.synth.channels must be 1 or 3");
  return s;
}

}  // namespace

VideoSequence RunConfig::load_video() const {
  if (frames_dir) return load_frames(*frames_dir);
  if (synth) {
    return treenerv::synth(synth->kind, synth->length, synth->height, synth->width,
                           synth->seed, synth->channels);
  }
  throw ConfigError("config has no video section");
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base) {
  require_known_keys(j, {"video", "decoder", "train", "out", "model", "compress", "compressed"},
                     "config");
  RunConfig c;
  if (auto it = j.find("video"); it != j.end()) {
    require_known_keys(*it, {"frames_dir", "synth"}, "video");
    if (it->contains("frames_dir") == it->contains("synth")) {
      throw ConfigError("video: set exactly one of frames_dir or synth");
    }
    if (it->contains("frames_dir")) {
      c.frames_dir = resolve(base, read_required<std::string>(*it, "frames_dir", "video"));
    } else {
      c.synth = parse_synth(it->at("synth"));
    }
  }
  if (auto it = j.find("decoder"); it != j.end()) c.decoder = DecoderConfig::from_json(*it);
  if (auto it = j.find("train"); it != j.end()) c.train = TrainConfig::from_json(*it);
  std::string out = "out";
  read_optional(j, "out", out, "config");
  c.out = resolve(base, out);
  if (j.contains("model")) c.model = resolve(base, read_required<std::string>(j, "model", "config"));
  if (j.contains("compressed")) {
    c.compressed = resolve(base, read_required<std::string>(j, "compressed", "config"));
  }
  if (auto it = j.find("compress"); it != j.end()) {
    require_known_keys(*it, {"prune_fraction", "bits"}, "compress");
    read_optional(*it, "prune_fraction", c.compress.prune_fraction, "compress");
    read_optional(*it, "bits", c.compress.bits, "compress");
    if (!(c.compress.prune_fraction >= 0.0 && c.compress.prune_fraction < 1.0)) {
      throw ConfigError("compress.prune_fraction must be in [0, 1)");
    }
    if (c.compress.bits < 2 || c.compress.bits > 16) {
      throw ConfigError("compress.bits must be in [2, 16]");
    }
  }
  if (c.synth) c.decoder.validate_for(c.synth->height, c.synth->width);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return from_json(j, file.parent_path());
}

}  // namespace treenerv
