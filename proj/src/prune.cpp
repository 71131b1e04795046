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

#include "treenerv/prune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace treenerv {

std::vector<std::uint64_t> rle_encode(const std::vector<bool>& mask) {
  std::vector<std::uint64_t> runs;
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) return runs;
  bool current = false;
  std::uint64_t run = 0;
  for (bool b : mask) {
    if (b != current) {
      runs.push_back(run);
      current = b;
      run = 0;
    }
    ++run;
  }
  runs.push_back(run);
  return runs;
}

std::vector<bool> rle_decode(std::span<const std::uint64_t> runs, std::size_t length) {
  std::vector<bool> mask;
  mask.reserve(length);
  bool current = false;
  for (std::uint64_t run : runs) {
    if (run > length - mask.size()) {
      throw std::invalid_argument("mask runs exceed length " + std::to_string(length));
    }
    mask.insert(mask.end(), run, current);
    current = !current;
  }
  if (!runs.empty() && mask.size() != length) {
    throw std::invalid_argument("mask runs cover " + std::to_string(mask.size()) +
                                " of " + std::to_string(length) + " positions");
  }
  mask.resize(length, false);
  return mask;
}

std::vector<std::size_t> smallest_magnitudes(std::span<const float> values,
                                             std::size_t count) {
  if (count > values.size()) throw std::invalid_argument("smallest_magnitudes: count too large");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    const float ma = std::fabs(values[a]);
    const float mb = std::fabs(values[b]);
    return ma < mb || (ma == mb && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + std::ptrdiff_t(count), idx.end(), less);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

PruneResult prune_global(const Decoder& decoder, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("prune fraction must be in [0, 1), got " +
                                std::to_string(fraction));
  }
  PruneResult result{decoder.clone(), {}, 0, 0};
  std::vector<Tensor> weights = result.decoder.weights();
  std::vector<float> flat;
  for (const Tensor& w : weights) flat.insert(flat.end(), w.data().begin(), w.data().end());
  result.weight_count = flat.size();
  result.pruned = static_cast<std::size_t>(std::floor(fraction * double(flat.size())));

  std::vector<bool> mask(flat.size(), false);
  for (std::size_t i : smallest_magnitudes(flat, result.pruned)) mask[i] = true;
  std::size_t offset = 0;
  for (Tensor& w : weights) {
    std::span<float> d = w.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (mask[offset + i]) d[i] = 0.0f;
    }
    offset += d.size();
  }
  result.mask_runs = rle_encode(mask);
  return result;
}

}  // namespace treenerv
