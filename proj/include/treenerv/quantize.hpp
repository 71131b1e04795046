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

// Per-tensor affine quantization to unsigned b-bit symbols.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "treenerv/tensor.hpp"

namespace treenerv {

struct QuantParams {
  double scale = 0.0;
  double zero_point = 0.0;
  unsigned bits = 8;

  std::uint32_t max_symbol() const { return (std::uint32_t{1} << bits) - 1; }
  // round((x - zero_point) / scale), clamped to [0, 2^bits - 1]; 0 when scale is 0.
  std::uint32_t symbol(float x) const;
  float value(std::uint32_t symbol) const;
};

struct QuantizedTensor {
  Shape shape;
  QuantParams params;
  std::vector<std::uint32_t> symbols;
};

// scale = (max - min) / (2^bits - 1), zero_point = min. Bits in [2, 16].
QuantParams fit_quant_params(std::span<const float> values, unsigned bits);
QuantizedTensor quantize_affine(const Tensor& tensor, unsigned bits);
Tensor dequantize(const QuantizedTensor& q);

}  // namespace treenerv
