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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "treenerv/video.hpp"

namespace treenerv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Static background with a moving blob and a drifting grating whose position
// depends only on the motion clock `tau`.
struct MovingScene {
  double phase;        // seeded offset of the grating
  double tau_span;     // clock value at which the blob reaches the far side
  std::size_t height;
  std::size_t width;

  float value(std::size_t c, std::size_t y, std::size_t x, double tau) const {
    const double fx = double(x) / double(width);
    const double fy = double(y) / double(height);
    double base = 0.0;
    switch (c) {
      case 0: base = 0.25 + 0.5 * fx; break;
      case 1: base = 0.3 + 0.4 * fy; break;
      default: base = 0.5 + 0.2 * std::sin(kTwoPi * fx); break;
    }
    if (tau <= 0.0) return float(base);
    const double progress = std::min(1.0, tau / tau_span);
    const double cx = 0.15 + 0.7 * progress;
    const double cy = 0.5 + 0.25 * std::sin(1.5 * tau + phase);
    const double dx = (fx - cx) * double(width) / double(height);
    const double dy = fy - cy;
    const double blob = std::exp(-(dx * dx + dy * dy) / (2.0 * 0.12 * 0.12));
    static constexpr double kBlobColor[3] = {0.45, -0.2, 0.3};
    const double grating = 0.12 * std::sin(kTwoPi * 4.0 * fx + 2.0 * tau + phase);
    return float(std::clamp(base + kBlobColor[c % 3] * blob + grating, 0.0, 1.0));
  }
};

std::vector<Tensor> render(std::size_t length, std::size_t channels,
                           std::size_t height, std::size_t width,
                           const std::vector<double>& tau,
                           const MovingScene& scene, double noise,
                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-noise, noise);
  std::vector<Tensor> frames;
  frames.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    Tensor frame = Tensor::zeros({channels, height, width});
    std::span<float> d = frame.data();
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
          double v = scene.value(c, y, x, tau[t]);
          if (noise > 0.0) v += jitter(rng);
          d[(c * height + y) * width + x] = float(std::clamp(v, 0.0, 1.0));
        }
    frames.push_back(std::move(frame));
  }
  return frames;
}

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return std::accumulate(v.begin() + std::ptrdiff_t(begin),
                         v.begin() + std::ptrdiff_t(end), 0.0) /
         double(end - begin);
}

}  // namespace

std::optional<SynthKind> parse_synth_kind(std::string_view name) {
  if (name == "static_dynamic") return SynthKind::kStaticDynamic;
  if (name == "smooth") return SynthKind::kSmooth;
  if (name == "piecewise") return SynthKind::kPiecewise;
  return std::nullopt;
}

std::string_view synth_kind_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::kStaticDynamic: return "static_dynamic";
    case SynthKind::kSmooth: return "smooth";
    case SynthKind::kPiecewise: return "piecewise";
  }
  return "unknown";
}

VideoSequence synth(SynthKind kind, std::size_t length, std::size_t height,
                    std::size_t width, std::uint64_t seed, std::size_t channels) {
  if (length < 4) {
    throw std::invalid_argument("synth: length must be >= 4, got " +
                                std::to_string(length));
  }
  if (height == 0 || width == 0 || (channels != 1 && channels != 3)) {
    throw std::invalid_argument("synth: bad frame geometry");
  }
  std::mt19937_64 rng(seed);
  const double phase = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
  const std::string source = "synth:" + std::string(synth_kind_name(kind));

  if (kind == SynthKind::kSmooth) {
    std::vector<Tensor> frames;
    for (std::size_t t = 0; t < length; ++t) {
      Tensor frame = Tensor::zeros({channels, height, width});
      std::span<float> d = frame.data();
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t y = 0; y < height; ++y)
          for (std::size_t x = 0; x < width; ++x) {
            const double fx = double(x) / double(width);
            const double fy = double(y) / double(height);
            const double v =
                0.5 + 0.3 * std::sin(kTwoPi * (fx + 0.5 * fy) + 0.9 * double(c) +
                                     phase + 0.05 * double(t)) +
                0.1 * std::cos(kTwoPi * fy - 0.03 * double(t));
            d[(c * height + y) * width + x] = float(v);
          }
      frames.push_back(std::move(frame));
    }
    VideoSequence video(std::move(frames), source);
    const std::vector<double> residual = adjacent_frame_mse(video);
    if (*std::max_element(residual.begin(), residual.end()) >= 1e-3) {
      throw std::logic_error("synth smooth: adjacent-frame MSE bound violated");
    }
    return video;
  }

  // Motion clock: frozen in calm frames, advancing one unit per burst frame.
  std::vector<double> tau(length, 0.0);
  if (kind == SynthKind::kStaticDynamic) {
    const std::size_t half = length / 2;
    for (std::size_t t = half; t < length; ++t) tau[t] = double(t - half + 1);
  } else {
    const std::size_t segment = std::max<std::size_t>(2, length / 8);
    double clock = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
      if ((t / segment) % 2 == 1) clock += 1.0;
      tau[t] = clock;
    }
  }
  const double span = std::max(1.0, *std::max_element(tau.begin(), tau.end()));
  const MovingScene scene{phase, span, height, width};
  VideoSequence video(render(length, channels, height, width, tau, scene, 0.002, rng),
                      source);

  if (kind == SynthKind::kStaticDynamic) {
    const std::vector<double> residual = adjacent_frame_mse(video);
    const std::size_t half = length / 2;
    const double calm = mean_of(residual, 1, half);
    const double busy = mean_of(residual, half, length);
    if (!(busy >= 10.0 * calm)) {
      throw std::logic_error("synth static_dynamic: dynamic half is not 10x busier");
    }
  }
  return video;
}

}  // namespace treenerv
