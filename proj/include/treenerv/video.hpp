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

// Video sequences in [0, 1], numbered Netpbm frame directories, and the
// deterministic synthetic test videos.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treenerv/tensor.hpp"

namespace treenerv {

class VideoSequence {
 public:
  VideoSequence() = default;
  // All frames must be C x H x W with the same shape and at least two frames.
  VideoSequence(std::vector<Tensor> frames, std::string source);

  std::size_t length() const { return frames_.size(); }
  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  const std::string& source() const { return source_; }

  // Counts reads while the access log is enabled.
  const Tensor& frame(std::size_t index) const;

  void enable_access_log();
  // Per-frame read counts since enable_access_log().
  const std::vector<std::size_t>& access_log() const { return access_; }

 private:
  std::vector<Tensor> frames_;
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::string source_;
  bool logging_ = false;
  mutable std::vector<std::size_t> access_;
};

// Reads zero-padded numbered P5/P6 files (maxval 255) from `dir`.
VideoSequence load_frames(const std::filesystem::path& dir);

// Writes frame_0000.ppm (or .pgm for one channel) ... into `dir`.
void save_frames(const VideoSequence& video, const std::filesystem::path& dir);

// Single-frame Netpbm I/O; pixel values are mapped by /255 and round-half-up.
Tensor read_netpbm(const std::filesystem::path& file);
void write_netpbm(const Tensor& frame, const std::filesystem::path& file);

enum class SynthKind { kStaticDynamic, kSmooth, kPiecewise };

std::optional<SynthKind> parse_synth_kind(std::string_view name);
std::string_view synth_kind_name(SynthKind kind);

// Deterministic in `seed`. Throws for length < 4.
VideoSequence synth(SynthKind kind, std::size_t length, std::size_t height,
                    std::size_t width, std::uint64_t seed,
                    std::size_t channels = 3);

// MSE between frame i and frame i - 1; entry 0 is 0.
std::vector<double> adjacent_frame_mse(const VideoSequence& video);

}  // namespace treenerv
