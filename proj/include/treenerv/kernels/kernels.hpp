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

// Data-parallel inner loops used by the tensor engine and the optimizer.
//
// Every kernel has a portable scalar reference in kernels/scalar.cpp. On x86-64
// builds an AVX2/FMA variant is compiled into its own translation unit and
// selected at runtime when the CPU reports support. Variants agree with the
// reference up to floating-point reassociation; tests/unit/kernels_test.cpp
// pins the tolerances.

#include <cstddef>
#include <string_view>

namespace treenerv::kernels {

struct AdamStep {
  float lr;
  float beta1;
  float beta2;
  float eps;
  // 1 - beta^t for the parameter's own step count.
  float bias_correction1;
  float bias_correction2;
};

struct KernelTable {
  std::string_view name;

  // y[i] += sum_r a[r] * x[r * x_stride + i], for i < n and r < rows.
  void (*accumulate_rows)(std::size_t n, std::size_t rows, const float* a,
                          const float* x, std::size_t x_stride, float* y);

  // Dot product with 64-bit accumulation.
  double (*dot)(std::size_t n, const float* x, const float* y);

  // sum (a[i] - b[i])^2 with 64-bit accumulation.
  double (*squared_distance)(std::size_t n, const float* a, const float* b);

  // out[i] = wl * a[i] + wu * b[i]
  void (*lerp)(std::size_t n, float wl, const float* a, float wu,
               const float* b, float* out);

  // y += a * x
  void (*axpy)(std::size_t n, float a, const float* x, float* y);

  // Tanh-approximation GELU.
  void (*gelu)(std::size_t n, const float* x, float* y);
  // dx[i] += gelu'(x[i]) * dy[i]
  void (*gelu_backward)(std::size_t n, const float* x, const float* dy,
                        float* dx);

  // y = 1 / (1 + exp(-x))
  void (*sigmoid)(std::size_t n, const float* x, float* y);
  // dx[i] += y[i] * (1 - y[i]) * dy[i], where y is the forward output.
  void (*sigmoid_backward)(std::size_t n, const float* y, const float* dy,
                           float* dx);

  void (*adam_update)(std::size_t n, const AdamStep& step, const float* grad,
                      float* param, float* m, float* v);
};

const KernelTable& scalar_kernels();

// nullptr when the AVX2 variant was not compiled or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

// Best variant for this machine. TREENERV_KERNELS=scalar forces the reference.
const KernelTable& active();

}  // namespace treenerv::kernels
