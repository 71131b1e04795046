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

#include <cmath>
#include <stdexcept>

#include "treenerv/kernels/kernels.hpp"
#include "treenerv/metrics.hpp"

namespace treenerv {

double psnr_from_mse(double mse) {
  if (mse < 1e-10) return kPsnrCap;
  return 10.0 * std::log10(1.0 / mse);
}

double psnr(const Tensor& pred, const Tensor& target) {
  if (!pred.defined() || !target.defined() || pred.shape() != target.shape()) {
    throw ShapeError("psnr: shape mismatch");
  }
  if (pred.numel() == 0) throw std::invalid_argument("psnr: empty frames");
  const double mse = kernels::active().squared_distance(
                         pred.numel(), pred.data().data(), target.data().data()) /
                     double(pred.numel());
  return psnr_from_mse(mse);
}

double bits_per_pixel(std::size_t total_bits, std::size_t length,
                      std::size_t height, std::size_t width) {
  const std::size_t pixels = length * height * width;
  if (pixels == 0) throw std::invalid_argument("bpp: zero-size video");
  return double(total_bits) / double(pixels);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("pearson: sequences must be non-empty and equal length");
  }
  const double n = double(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace treenerv
