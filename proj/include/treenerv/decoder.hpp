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

// Cascaded pixel-shuffle decoder: time embedding (h x w x d) -> frame
// (C x H x W). Block 0 is the bottlenecked two-conv variant, the remaining
// blocks are single wide convolutions, and a 1x1 head maps to the output
// channels through a logistic squashing.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"

#include "treenerv/feature_shape.hpp"
#include "treenerv/tensor.hpp"

namespace treenerv {

struct DecoderConfig {
  FeatureShape input_shape{4, 8, 16};
  std::vector<std::size_t> strides{2, 2, 2};
  // Output channels per block. Missing entries halve the previous one; every
  // entry is floored at min_channels.
  std::vector<std::size_t> channels{32, 16};
  std::size_t min_channels = 8;
  std::size_t output_channels = 3;

  std::vector<std::size_t> block_channels() const;
  // Bottleneck width of the first block: max(1, min(d, O) / 4).
  std::size_t bottleneck() const;
  std::size_t output_height() const;
  std::size_t output_width() const;

  // Throws std::invalid_argument on a malformed config.
  void validate() const;
  // Additionally checks that the decoder produces frames of this size.
  void validate_for(std::size_t frame_height, std::size_t frame_width) const;

  nlohmann::json to_json() const;
  static DecoderConfig from_json(const nlohmann::json& j);

  bool operator==(const DecoderConfig&) const = default;
};

struct ParamCount {
  std::size_t weights = 0;
  std::size_t with_biases = 0;

  ParamCount& operator+=(const ParamCount& o) {
    weights += o.weights;
    with_biases += o.with_biases;
    return *this;
  }
};

// 9 * d * O * S^2
std::size_t standard_block_weights(std::size_t d, std::size_t out, std::size_t stride);
// 9 * d' * (d * S^2 + O)
std::size_t enerv_block_weights(std::size_t d, std::size_t bottleneck,
                                std::size_t out, std::size_t stride);

struct ConvLayer {
  Tensor weight;  // C_out x C_in x k x k
  Tensor bias;    // C_out
};

enum class BlockKind { kStandard, kEnerv };

struct NervBlock {
  BlockKind kind = BlockKind::kStandard;
  std::size_t stride = 1;
  std::vector<ConvLayer> convs;

  ParamCount param_count() const;
};

class Decoder {
 public:
  // Kaiming-uniform weights, deterministic in `seed`.
  Decoder(DecoderConfig config, std::uint64_t seed);

  const DecoderConfig& config() const { return config_; }
  const std::vector<NervBlock>& blocks() const { return blocks_; }
  const ConvLayer& head() const { return head_; }

  // `embedding` is channel-last h x w x d; the result is C x H x W in (0, 1).
  Tensor forward(const Tensor& embedding, Tape* tape = nullptr) const;

  // Weight and bias tensors in a fixed order: block convs, then the head.
  std::vector<Tensor> parameters() const;
  // Convolution weights only (the prunable set), same order.
  std::vector<Tensor> weights() const;

  ParamCount param_count() const;

  // Deep copy with independent parameter storage.
  Decoder clone() const;

 private:
  Decoder() = default;

  DecoderConfig config_;
  std::vector<NervBlock> blocks_;
  ConvLayer head_;
};

}  // namespace treenerv
