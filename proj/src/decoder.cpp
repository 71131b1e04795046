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

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "treenerv/decoder.hpp"
#include "treenerv/json_fields.hpp"

namespace treenerv {

namespace {

std::size_t product(const std::vector<std::size_t>& v) {
  std::size_t p = 1;
  for (std::size_t x : v) p *= x;
  return p;
}

ConvLayer make_conv(std::size_t c_in, std::size_t c_out, std::size_t k,
                    std::mt19937_64& rng) {
  const float bound = 1.0f / std::sqrt(float(c_in * k * k));
  std::uniform_real_distribution<float> dist(-bound, bound);
  std::vector<float> w(c_out * c_in * k * k);
  for (float& x : w) x = dist(rng);
  std::vector<float> b(c_out);
  for (float& x : b) x = dist(rng);
  return ConvLayer{Tensor::from_data({c_out, c_in, k, k}, std::move(w), true),
                   Tensor::from_data({c_out}, std::move(b), true)};
}

ConvLayer clone_conv(const ConvLayer& layer) {
  ConvLayer copy{layer.weight.clone(), layer.bias.clone()};
  copy.weight.set_requires_grad(true);
  copy.bias.set_requires_grad(true);
  return copy;
}

}  // namespace

std::size_t standard_block_weights(std::size_t d, std::size_t out,
                                   std::size_t stride) {
  return 9 * d * out * stride * stride;
}

std::size_t enerv_block_weights(std::size_t d, std::size_t bottleneck,
                                std::size_t out, std::size_t stride) {
  return 9 * bottleneck * (d * stride * stride + out);
}

std::vector<std::size_t> DecoderConfig::block_channels() const {
  std::vector<std::size_t> out;
  out.reserve(strides.size());
  for (std::size_t i = 0; i < strides.size(); ++i) {
    std::size_t c = i < channels.size() ? channels[i] : out.back() / 2;
    out.push_back(std::max(c, min_channels));
  }
  return out;
}

std::size_t DecoderConfig::bottleneck() const {
  const std::size_t first = block_channels().front();
  return std::max<std::size_t>(1, std::min(input_shape.depth, first) / 4);
}

std::size_t DecoderConfig::output_height() const {
  return input_shape.height * product(strides);
}

std::size_t DecoderConfig::output_width() const {
  return input_shape.width * product(strides);
}

void DecoderConfig::validate() const {
  if (input_shape.height == 0 || input_shape.width == 0 || input_shape.depth == 0) {
    throw std::invalid_argument("decoder: input_shape extents must be >= 1");
  }
  if (strides.empty()) throw std::invalid_argument("decoder: strides must not be empty");
  for (std::size_t s : strides) {
    if (s == 0) throw std::invalid_argument("decoder: every stride must be >= 1");
  }
  if (channels.empty()) throw std::invalid_argument("decoder: channels must not be empty");
  for (std::size_t c : channels) {
    if (c == 0) throw std::invalid_argument("decoder: every channel count must be >= 1");
  }
  if (min_channels == 0) throw std::invalid_argument("decoder: min_channels must be >= 1");
  if (output_channels != 1 && output_channels != 3) {
    throw std::invalid_argument("decoder: output_channels must be 1 or 3");
  }
}

void DecoderConfig::validate_for(std::size_t frame_height,
                                 std::size_t frame_width) const {
  validate();
  if (output_height() != frame_height || output_width() != frame_width) {
    throw std::invalid_argument(
        "decoder: strides map " + std::to_string(input_shape.height) + "x" +
        std::to_string(input_shape.width) + " to " +
        std::to_string(output_height()) + "x" + std::to_string(output_width()) +
        ", frames are " + std::to_string(frame_height) + "x" +
        std::to_string(frame_width));
  }
}

nlohmann::json DecoderConfig::to_json() const {
  return {
      {"input_shape", {input_shape.height, input_shape.width, input_shape.depth}},
      {"strides", strides},
      {"channels", channels},
      {"min_channels", min_channels},
      {"output_channels", output_channels},
  };
}

DecoderConfig DecoderConfig::from_json(const nlohmann::json& j) {
  constexpr std::string_view ctx = "decoder";
  require_known_keys(
      j, {"input_shape", "strides", "channels", "min_channels", "output_channels"},
      ctx);
  DecoderConfig c;
  std::vector<std::size_t> shape{c.input_shape.height, c.input_shape.width,
                                 c.input_shape.depth};
  read_optional(j, "input_shape", shape, ctx);
  if (shape.size() != 3) throw ConfigError("decoder.input_shape: expected [h, w, d]");
  c.input_shape = {shape[0], shape[1], shape[2]};
  read_optional(j, "strides", c.strides, ctx);
  read_optional(j, "channels", c.channels, ctx);
  read_optional(j, "min_channels", c.min_channels, ctx);
  read_optional(j, "output_channels", c.output_channels, ctx);
  c.validate();
  return c;
}

ParamCount NervBlock::param_count() const {
  ParamCount count;
  for (const ConvLayer& conv : convs) {
    count.weights += conv.weight.numel();
    count.with_biases += conv.weight.numel() + conv.bias.numel();
  }
  return count;
}

Decoder::Decoder(DecoderConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const std::vector<std::size_t> outs = config_.block_channels();
  std::size_t in = config_.input_shape.depth;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const std::size_t s = config_.strides[i];
    NervBlock block;
    block.stride = s;
    if (i == 0) {
      const std::size_t dprime = config_.bottleneck();
      block.kind = BlockKind::kEnerv;
      block.convs.push_back(make_conv(in, dprime * s * s, 3, rng));
      block.convs.push_back(make_conv(dprime, outs[i], 3, rng));
    } else {
      block.kind = BlockKind::kStandard;
      block.convs.push_back(make_conv(in, outs[i] * s * s, 3, rng));
    }
    blocks_.push_back(std::move(block));
    in = outs[i];
  }
  head_ = make_conv(in, config_.output_channels, 1, rng);
}

Tensor Decoder::forward(const Tensor& embedding, Tape* tape) const {
  if (!embedding.defined() ||
      embedding.shape() != config_.input_shape.as_shape()) {
    throw ShapeError("decoder: embedding shape " +
                     (embedding.defined() ? shape_string(embedding.shape())
                                          : "<undefined>") +
                     " does not match " +
                     shape_string(config_.input_shape.as_shape()));
  }
  Tensor x = hwc_to_chw(embedding, tape);
  for (const NervBlock& block : blocks_) {
    x = conv2d(x, block.convs[0].weight, block.convs[0].bias, tape);
    x = pixel_shuffle(x, block.stride, tape);
    x = gelu(x, tape);
    if (block.kind == BlockKind::kEnerv) {
      x = conv2d(x, block.convs[1].weight, block.convs[1].bias, tape);
      x = gelu(x, tape);
    }
  }
  x = conv2d(x, head_.weight, head_.bias, tape);
  return sigmoid(x, tape);
}

std::vector<Tensor> Decoder::parameters() const {
  std::vector<Tensor> params;
  for (const NervBlock& block : blocks_) {
    for (const ConvLayer& conv : block.convs) {
      params.push_back(conv.weight);
      params.push_back(conv.bias);
    }
  }
  params.push_back(head_.weight);
  params.push_back(head_.bias);
  return params;
}

std::vector<Tensor> Decoder::weights() const {
  std::vector<Tensor> out;
  for (const NervBlock& block : blocks_) {
    for (const ConvLayer& conv : block.convs) out.push_back(conv.weight);
  }
  out.push_back(head_.weight);
  return out;
}

ParamCount Decoder::param_count() const {
  ParamCount total;
  for (const NervBlock& block : blocks_) total += block.param_count();
  total.weights += head_.weight.numel();
  total.with_biases += head_.weight.numel() + head_.bias.numel();
  return total;
}

Decoder Decoder::clone() const {
  Decoder copy;
  copy.config_ = config_;
  for (const NervBlock& block : blocks_) {
    NervBlock b{block.kind, block.stride, {}};
    for (const ConvLayer& conv : block.convs) b.convs.push_back(clone_conv(conv));
    copy.blocks_.push_back(std::move(b));
  }
  copy.head_ = clone_conv(head_);
  return copy;
}

}  // namespace treenerv
