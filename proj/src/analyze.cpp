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

#include "treenerv/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "treenerv/metrics.hpp"

namespace treenerv {

std::size_t time_bin(double t, std::size_t length, std::size_t bins) {
  if (length < 2 || bins == 0) throw std::invalid_argument("time_bin: empty range");
  const double pos = t / double(length - 1) * double(bins);
  return std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, std::floor(pos))));
}

std::vector<double> uniform_keys(std::size_t length, std::size_t nodes) {
  std::vector<double> keys;
  for (std::size_t i = 0; i < nodes; ++i) {
    keys.push_back(double(i) * double(length - 1) / double(nodes - 1));
  }
  return keys;
}

Analysis analyze(const Model& model, const VideoSequence& video, std::size_t bins) {
  const std::size_t L = video.length();
  Analysis a;
  const std::vector<double> adjacent = adjacent_frame_mse(video);
  for (const FrameScore& s : evaluate(model, video)) {
    a.frames.push_back({s.frame, adjacent[s.frame], s.psnr});
  }

  const double width = double(L - 1) / double(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    a.bins.push_back({double(b) * width, double(b + 1) * width, 0, 0.0, 0.0});
  }
  const std::vector<double> keys = model.grid.in_order_keys();
  for (double k : keys) ++a.bins[time_bin(k, L, bins)].keys;
  for (BinAnalysis& bin : a.bins) {
    bin.key_density = double(bin.keys) / (double(keys.size()) * width);
  }
  for (std::size_t f = 0; f < L; ++f) a.bins[time_bin(double(f), L, bins)].residual_mass += adjacent[f];

  std::vector<double> mass;
  std::vector<double> density;
  for (const BinAnalysis& bin : a.bins) {
    mass.push_back(bin.residual_mass);
    density.push_back(bin.key_density);
  }
  a.correlation = pearson(mass, density);

  const std::vector<double> initial = uniform_keys(model.video_length, model.init_nodes);
  for (double k : keys) {
    if (!std::binary_search(initial.begin(), initial.end(), k)) a.grown_keys.push_back(k);
  }
  if (!a.grown_keys.empty()) {
    const double mid = double(L - 1) / 2.0;
    const auto late = std::count_if(a.grown_keys.begin(), a.grown_keys.end(),
                                    [&](double k) { return k > mid; });
    a.grown_second_half = double(late) / double(a.grown_keys.size());
  }
  return a;
}

void write_analysis(const Analysis& a, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  {
    std::ofstream out = open("frames.csv");
    out << "frame,adjacent_mse,psnr\n";
    for (const FrameAnalysis& f : a.frames) {
      out << fmt::format("{},{:.17g},{:.17g}\n", f.frame, f.adjacent_mse, f.psnr);
    }
  }
  {
    std::ofstream out = open("bins.csv");
    out << "bin,lower,upper,keys,key_density,residual_mass\n";
    for (std::size_t b = 0; b < a.bins.size(); ++b) {
      const BinAnalysis& bin = a.bins[b];
      out << fmt::format("{},{:.17g},{:.17g},{},{:.17g},{:.17g}\n", b, bin.lower,
                         bin.upper, bin.keys, bin.key_density, bin.residual_mass);
    }
  }
  {
    std::ofstream out = open("summary.csv");
    out << "correlation,grown_keys,grown_second_half\n";
    out << fmt::format("{:.17g},{},{:.17g}\n", a.correlation, a.grown_keys.size(),
                       a.grown_second_half);
  }
}

}  // namespace treenerv
