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

// Global magnitude pruning of decoder convolution weights.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "treenerv/decoder.hpp"

namespace treenerv {

// Alternating run lengths over a boolean mask, starting with a run of
// `false` (possibly 0). An all-false mask encodes as an empty list.
std::vector<std::uint64_t> rle_encode(const std::vector<bool>& mask);
std::vector<bool> rle_decode(std::span<const std::uint64_t> runs, std::size_t length);

// Indices of the `count` smallest |x|, ties broken by lower index, ascending.
std::vector<std::size_t> smallest_magnitudes(std::span<const float> values,
                                             std::size_t count);

struct PruneResult {
  Decoder decoder;
  // Over the concatenation of decoder.weights(); true = pruned.
  std::vector<std::uint64_t> mask_runs;
  std::size_t pruned = 0;
  std::size_t weight_count = 0;
};

// Zeroes floor(fraction * weight_count) smallest-magnitude conv weights
// across the whole decoder. Biases are left alone. fraction in [0, 1).
PruneResult prune_global(const Decoder& decoder, double fraction);

}  // namespace treenerv
