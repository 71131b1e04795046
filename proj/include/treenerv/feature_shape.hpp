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

#include "treenerv/tensor.hpp"

namespace treenerv {

// Channel-last extent of one temporal feature: h x w x d.
struct FeatureShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t depth = 0;

  Shape as_shape() const { return {height, width, depth}; }
  std::size_t numel() const { return height * width * depth; }
  bool operator==(const FeatureShape&) const = default;
};

}  // namespace treenerv
