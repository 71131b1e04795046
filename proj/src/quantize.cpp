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

#include "treenerv/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace treenerv {

std::uint32_t QuantParams::symbol(float x) const {
  if (scale == 0.0) return 0;
  const double s = std::round((double(x) - zero_point) / scale);
  return static_cast<std::uint32_t>(std::clamp(s, 0.0, double(max_symbol())));
}

float QuantParams::value(std::uint32_t symbol) const {
  return static_cast<float>(zero_point + scale * double(symbol));
}

QuantParams fit_quant_params(std::span<const float> values, unsigned bits) {
  if (bits < 2 || bits > 16) {
    throw std::invalid_argument("quantization bits must be in [2, 16], got " +
                                std::to_string(bits));
  }
  if (values.empty()) throw std::invalid_argument("cannot quantize an empty tensor");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!std::isfinite(*lo) || !std::isfinite(*hi)) {
    throw std::invalid_argument("cannot quantize non-finite values");
  }
  QuantParams p;
  p.bits = bits;
  p.zero_point = *lo;
  p.scale = (double(*hi) - double(*lo)) / double((std::uint32_t{1} << bits) - 1);
  return p;
}

QuantizedTensor quantize_affine(const Tensor& tensor, unsigned bits) {
  QuantizedTensor q;
  q.shape = tensor.shape();
  q.params = fit_quant_params(tensor.data(), bits);
  q.symbols.reserve(tensor.numel());
  for (float x : tensor.data()) q.symbols.push_back(q.params.symbol(x));
  return q;
}

Tensor dequantize(const QuantizedTensor& q) {
  if (q.symbols.size() != shape_numel(q.shape)) {
    throw ShapeError("dequantize: " + std::to_string(q.symbols.size()) +
                     " symbols for shape " + shape_string(q.shape));
  }
  std::vector<float> data;
  data.reserve(q.symbols.size());
  for (std::uint32_t s : q.symbols) data.push_back(q.params.value(s));
  return Tensor::from_data(q.shape, std::move(data));
}

}  // namespace treenerv
