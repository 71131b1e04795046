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

// Temporal sampling-density report: where the tree placed its keys versus
// where the video changes.

#include <cstddef>
#include <filesystem>
#include <vector>

#include "treenerv/trainer.hpp"
#include "treenerv/video.hpp"

namespace treenerv {

inline constexpr std::size_t kAnalysisBins = 16;

struct FrameAnalysis {
  std::size_t frame = 0;
  double adjacent_mse = 0.0;  // against frame - 1; 0 for the first frame
  double psnr = 0.0;
};

struct BinAnalysis {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t keys = 0;
  double key_density = 0.0;    // keys / (total keys * bin width)
  double residual_mass = 0.0;  // summed adjacent-frame MSE of frames in the bin
};

struct Analysis {
  std::vector<FrameAnalysis> frames;
  std::vector<BinAnalysis> bins;
  double correlation = 0.0;  // Pearson(residual_mass, key_density) over bins
  std::vector<double> grown_keys;
  // Share of grown keys above the temporal midpoint; 0 when none grew.
  double grown_second_half = 0.0;
};

// Equal-width bin of time t over [0, length - 1].
std::size_t time_bin(double t, std::size_t length, std::size_t bins);
// Keys of the uniform initial grid with `nodes` points.
std::vector<double> uniform_keys(std::size_t length, std::size_t nodes);

Analysis analyze(const Model& model, const VideoSequence& video,
                 std::size_t bins = kAnalysisBins);

// frames.csv, bins.csv and summary.csv.
void write_analysis(const Analysis& analysis, const std::filesystem::path& dir);

}  // namespace treenerv
