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

#include "treenerv/kernels/kernels.hpp"
#include "gelu.hpp"

namespace treenerv::kernels {

namespace {

void accumulate_rows_scalar(std::size_t n, std::size_t rows, const float* a,
                            const float* x, std::size_t x_stride, float* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const float coef = a[r];
    if (coef == 0.0f) continue;
    const float* row = x + r * x_stride;
    for (std::size_t i = 0; i < n; ++i) y[i] += coef * row[i];
  }
}

double dot_scalar(std::size_t n, const float* x, const float* y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += double(x[i]) * double(y[i]);
  return acc;
}

double squared_distance_scalar(std::size_t n, const float* a, const float* b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = double(a[i]) - double(b[i]);
    acc += d * d;
  }
  return acc;
}

void lerp_scalar(std::size_t n, float wl, const float* a, float wu,
                 const float* b, float* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = wl * a[i] + wu * b[i];
}

void axpy_scalar(std::size_t n, float a, const float* x, float* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gelu_scalar(std::size_t n, const float* x, float* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = detail::gelu_value(x[i]);
}

void gelu_backward_scalar(std::size_t n, const float* x, const float* dy,
                          float* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] += detail::gelu_derivative(x[i]) * dy[i];
}

void sigmoid_scalar(std::size_t n, const float* x, float* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
}

void sigmoid_backward_scalar(std::size_t n, const float* y, const float* dy,
                             float* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] += y[i] * (1.0f - y[i]) * dy[i];
}

void adam_update_scalar(std::size_t n, const AdamStep& s, const float* grad,
                        float* param, float* m, float* v) {
  const float step_size = s.lr / s.bias_correction1;
  const float inv_sqrt_bc2 = 1.0f / std::sqrt(s.bias_correction2);
  for (std::size_t i = 0; i < n; ++i) {
    const float g = grad[i];
    m[i] = s.beta1 * m[i] + (1.0f - s.beta1) * g;
    v[i] = s.beta2 * v[i] + (1.0f - s.beta2) * g * g;
    const float denom = std::sqrt(v[i]) * inv_sqrt_bc2 + s.eps;
    param[i] -= step_size * m[i] / denom;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      .name = "scalar",
      .accumulate_rows = accumulate_rows_scalar,
      .dot = dot_scalar,
      .squared_distance = squared_distance_scalar,
      .lerp = lerp_scalar,
      .axpy = axpy_scalar,
      .gelu = gelu_scalar,
      .gelu_backward = gelu_backward_scalar,
      .sigmoid = sigmoid_scalar,
      .sigmoid_backward = sigmoid_backward_scalar,
      .adam_update = adam_update_scalar,
  };
  return table;
}

}  // namespace treenerv::kernels
