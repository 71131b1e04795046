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

// Tanh-approximate GELU written through the logistic function:
// 0.5 (1 + tanh u) = s and 0.5 (1 - tanh^2 u) = 2 s (1 - s) with
// s = 1 / (1 + exp(-2u)). Avoids the cancellation of 1 - t * t near |t| = 1.

#include <algorithm>
#include <cmath>

namespace treenerv::kernels::detail {

inline constexpr float kGeluScale = 0.7978845608028654f;  // sqrt(2/pi)
inline constexpr float kGeluCubic = 0.044715f;
// Keeps exp(-2u) and 1 / (1 + exp(-2u)) finite and normal in float.
inline constexpr float kExpLimit = 80.0f;

inline float gelu_inner(float v) { return kGeluScale * (v + kGeluCubic * v * v * v); }

inline float gelu_value(float v) {
  const float e = std::exp(std::clamp(-2.0f * gelu_inner(v), -kExpLimit, kExpLimit));
  return v / (1.0f + e);
}

inline float gelu_derivative(float v) {
  const float e = std::exp(std::clamp(-2.0f * gelu_inner(v), -kExpLimit, kExpLimit));
  const float s = 1.0f / (1.0f + e);
  const float du = kGeluScale * (1.0f + 3.0f * kGeluCubic * v * v);
  return s + 2.0f * v * du * s * (e * s);
}

}  // namespace treenerv::kernels::detail
