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
#include "treenerv/optimizer.hpp"

namespace treenerv {

void Adam::step(Tensor& param, double lr) {
  if (!param.has_grad()) return;
  State& s = state_[param.id()];
  if (s.m.empty()) {
    s.param = param;
    s.m.assign(param.numel(), 0.0f);
    s.v.assign(param.numel(), 0.0f);
  }
  ++s.steps;
  const double t = double(s.steps);
  const kernels::AdamStep step{
      float(lr),
      float(config_.beta1),
      float(config_.beta2),
      float(config_.eps),
      float(1.0 - std::pow(config_.beta1, t)),
      float(1.0 - std::pow(config_.beta2, t)),
  };
  std::span<float> grad = param.grad();
  kernels::active().adam_update(param.numel(), step, grad.data(),
                                param.data().data(), s.m.data(), s.v.data());
  param.zero_grad();
}

std::uint64_t Adam::steps(const Tensor& param) const {
  auto it = state_.find(param.id());
  return it == state_.end() ? 0 : it->second.steps;
}

}  // namespace treenerv
