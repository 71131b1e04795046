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
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "treenerv/kernels/kernels.hpp"
#include "treenerv/video.hpp"

namespace treenerv {

namespace fs = std::filesystem;

VideoSequence::VideoSequence(std::vector<Tensor> frames, std::string source)
    : frames_(std::move(frames)), source_(std::move(source)) {
  if (frames_.size() < 2) {
    throw std::invalid_argument("video needs at least 2 frames, got " +
                                std::to_string(frames_.size()));
  }
  const Shape& first = frames_.front().shape();
  if (first.size() != 3) {
    throw ShapeError("video frames must be C x H x W, got " + shape_string(first));
  }
  for (std::size_t i = 1; i < frames_.size(); ++i) {
    if (frames_[i].shape() != first) {
      throw ShapeError("video frame " + std::to_string(i) + " has shape " +
                       shape_string(frames_[i].shape()) + ", expected " +
                       shape_string(first));
    }
  }
  channels_ = first[0];
  height_ = first[1];
  width_ = first[2];
}

const Tensor& VideoSequence::frame(std::size_t index) const {
  if (logging_) ++access_.at(index);
  return frames_.at(index);
}

void VideoSequence::enable_access_log() {
  logging_ = true;
  access_.assign(frames_.size(), 0);
}

namespace {

// Skips whitespace and '#' comments in a Netpbm header.
void skip_header_space(std::istream& in) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

std::size_t read_header_number(std::istream& in, const fs::path& file) {
  skip_header_space(in);
  std::size_t value = 0;
  if (!(in >> value)) {
    throw std::runtime_error(file.string() + ": malformed Netpbm header");
  }
  return value;
}

}  // namespace

Tensor read_netpbm(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error(file.string() + ": cannot open");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  std::size_t channels = 0;
  if (magic[0] == 'P' && magic[1] == '6') {
    channels = 3;
  } else if (magic[0] == 'P' && magic[1] == '5') {
    channels = 1;
  } else {
    throw std::runtime_error(file.string() +
                             ": unsupported magic (expected P5 or P6)");
  }
  const std::size_t width = read_header_number(in, file);
  const std::size_t height = read_header_number(in, file);
  const std::size_t maxval = read_header_number(in, file);
  if (maxval != 255) {
    throw std::runtime_error(file.string() + ": maxval " +
                             std::to_string(maxval) + " unsupported (need 255)");
  }
  if (width == 0 || height == 0) {
    throw std::runtime_error(file.string() + ": empty image");
  }
  in.get();  // single whitespace before the raster
  std::vector<unsigned char> raster(width * height * channels);
  in.read(reinterpret_cast<char*>(raster.data()), std::streamsize(raster.size()));
  if (in.gcount() != std::streamsize(raster.size())) {
    throw std::runtime_error(file.string() + ": truncated raster");
  }
  std::vector<float> data(raster.size());
  const std::size_t plane = width * height;
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < channels; ++c) {
      data[c * plane + p] = float(raster[p * channels + c]) / 255.0f;
    }
  }
  return Tensor::from_data({channels, height, width}, std::move(data));
}

void write_netpbm(const Tensor& frame, const fs::path& file) {
  if (frame.shape().size() != 3 || (frame.dim(0) != 1 && frame.dim(0) != 3)) {
    throw ShapeError("write_netpbm: need 1 x H x W or 3 x H x W, got " +
                     shape_string(frame.shape()));
  }
  const std::size_t channels = frame.dim(0), height = frame.dim(1),
                    width = frame.dim(2);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error(file.string() + ": cannot open for writing");
  out << (channels == 3 ? "P6" : "P5") << '\n'
      << width << ' ' << height << "\n255\n";
  const std::size_t plane = width * height;
  std::span<const float> data = frame.data();
  std::vector<unsigned char> raster(plane * channels);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = std::clamp(double(data[c * plane + p]), 0.0, 1.0);
      raster[p * channels + c] = static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
    }
  }
  out.write(reinterpret_cast<const char*>(raster.data()),
            std::streamsize(raster.size()));
  if (!out) throw std::runtime_error(file.string() + ": write failed");
}

VideoSequence load_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error(dir.string() + ": not a directory");
  }
  std::map<long long, fs::path> numbered;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext != ".ppm" && ext != ".pgm") continue;
    const std::string stem = entry.path().stem().string();
    std::size_t digits = stem.size();
    while (digits > 0 && std::isdigit(static_cast<unsigned char>(stem[digits - 1]))) {
      --digits;
    }
    if (digits == stem.size()) {
      throw std::runtime_error(entry.path().string() + ": frame file name has no number");
    }
    const long long number = std::stoll(stem.substr(digits));
    if (!numbered.emplace(number, entry.path()).second) {
      throw std::runtime_error(entry.path().string() + ": duplicate frame number " +
                               std::to_string(number));
    }
  }
  if (numbered.empty()) {
    throw std::runtime_error(dir.string() + ": no .ppm/.pgm frames found");
  }
  std::vector<Tensor> frames;
  long long expected = numbered.begin()->first;
  for (const auto& [number, path] : numbered) {
    if (number != expected) {
      throw std::runtime_error(path.string() + ": non-contiguous numbering, expected frame " +
                               std::to_string(expected));
    }
    ++expected;
    Tensor frame = read_netpbm(path);
    if (!frames.empty() && frame.shape() != frames.front().shape()) {
      throw std::runtime_error(path.string() + ": resolution " +
                               shape_string(frame.shape()) + " differs from " +
                               shape_string(frames.front().shape()));
    }
    frames.push_back(std::move(frame));
  }
  if (frames.size() < 2) {
    throw std::runtime_error(dir.string() + ": need at least 2 frames");
  }
  return VideoSequence(std::move(frames), dir.string());
}

void save_frames(const VideoSequence& video, const fs::path& dir) {
  fs::create_directories(dir);
  const char* ext = video.channels() == 3 ? ".ppm" : ".pgm";
  for (std::size_t i = 0; i < video.length(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu%s", i, ext);
    write_netpbm(video.frame(i), dir / name);
  }
}

std::vector<double> adjacent_frame_mse(const VideoSequence& video) {
  std::vector<double> out(video.length(), 0.0);
  const auto& kern = kernels::active();
  for (std::size_t i = 1; i < video.length(); ++i) {
    const Tensor& a = video.frame(i);
    const Tensor& b = video.frame(i - 1);
    out[i] = kern.squared_distance(a.numel(), a.data().data(), b.data().data()) /
             double(a.numel());
  }
  return out;
}

}  // namespace treenerv
