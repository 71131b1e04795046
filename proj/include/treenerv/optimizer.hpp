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

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "treenerv/tensor.hpp"

namespace treenerv {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with per-tensor step counts, so parameters that are only touched by
// some steps (tree nodes outside the queried interval) keep correct bias
// correction. State for a tensor starts at zero on its first step.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update from param.grad() and zeroes the gradient. A tensor
  // without a gradient is left untouched.
  void step(Tensor& param, double lr);

  std::size_t tracked() const { return state_.size(); }
  std::uint64_t steps(const Tensor& param) const;
  const AdamConfig& config() const { return config_; }

 private:
  struct State {
    Tensor param;  // keeps the storage, and so the key, alive
    std::vector<float> m;
    std::vector<float> v;
    std::uint64_t steps = 0;
  };

  AdamConfig config_;
  std::unordered_map<const void*, State> state_;
};

}  // namespace treenerv
