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

#include <cstddef>
#include <span>

#include "treenerv/tensor.hpp"

namespace treenerv {

inline constexpr double kPsnrCap = 100.0;

// 10 log10(1 / mse) for unit-peak signals, capped at 100 dB below 1e-10.
double psnr_from_mse(double mse);
double psnr(const Tensor& pred, const Tensor& target);

// Bits per pixel of a representation of `length` frames of height x width.
double bits_per_pixel(std::size_t total_bits, std::size_t length,
                      std::size_t height, std::size_t width);

// Pearson correlation; 0 when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace treenerv
