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

#include "treenerv/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include <zlib.h>

#include "treenerv/huffman.hpp"
#include "treenerv/json_fields.hpp"
#include "treenerv/prune.hpp"
#include "treenerv/quantize.hpp"

namespace treenerv {
namespace {

constexpr char kMagic[4] = {'T', 'N', 'R', 'V'};
constexpr std::size_t kPreamble = 12;

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(in[at + i]) << (8 * i);
  return v;
}

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return std::uint32_t(crc32(crc, bytes.data(), uInt(bytes.size())));
}

// Model tensors in payload order: tree values (pre-order), then decoder
// parameters. `weight[i]` is the index into decoder.weights() or -1.
struct TensorList {
  std::vector<Tensor> tensors;
  std::vector<std::ptrdiff_t> weight;
};

TensorList list_tensors(const TreeGrid& grid, const Decoder& decoder) {
  TensorList list;
  for (const FeatureNode* node : grid.preorder()) {
    list.tensors.push_back(node->value);
    list.weight.push_back(-1);
  }
  const std::vector<Tensor> weights = decoder.weights();
  for (const Tensor& p : decoder.parameters()) {
    list.tensors.push_back(p);
    auto it = std::find_if(weights.begin(), weights.end(),
                           [&](const Tensor& w) { return w.same_storage(p); });
    list.weight.push_back(it == weights.end() ? -1 : it - weights.begin());
  }
  return list;
}

nlohmann::json base_header(const Model& model, Encoding encoding) {
  const FeatureShape& s = model.grid.value_shape();
  std::vector<double> keys;
  for (const FeatureNode* node : model.grid.preorder()) keys.push_back(node->key);
  return {
      {"encoding", encoding == Encoding::kFloat32 ? "float32" : "quantized"},
      {"value_shape", {s.height, s.width, s.depth}},
      {"decoder", model.decoder.config().to_json()},
      {"keys", keys},
      {"video",
       {{"length", model.video_length},
        {"init_nodes", model.init_nodes},
        {"split", model.split == FrameSplit::kEven ? "even" : "all"}}},
  };
}

std::vector<std::uint8_t> assemble(const nlohmann::json& header,
                                   std::span<const std::uint8_t> payload) {
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kContainerVersion);
  put_u32(out, std::uint32_t(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  put_u32(out, crc_of(out));
  return out;
}

struct Parsed {
  nlohmann::json header;
  std::span<const std::uint8_t> payload;
};

Parsed parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPreamble + 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ContainerError("not a TNRV container");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kContainerVersion) {
    throw ContainerError("unsupported container version " + std::to_string(version) +
                         " (expected " + std::to_string(kContainerVersion) + ")");
  }
  const std::uint32_t header_len = get_u32(bytes, 8);
  if (std::uint64_t(kPreamble) + header_len + 4 > bytes.size()) {
    throw ContainerError("header length " + std::to_string(header_len) +
                         " exceeds the file");
  }
  const std::size_t body = bytes.size() - 4;
  if (crc_of(bytes.first(body)) != get_u32(bytes, body)) {
    throw ContainerError("crc32 mismatch");
  }
  Parsed p;
  try {
    p.header = nlohmann::json::parse(bytes.begin() + kPreamble,
                                     bytes.begin() + kPreamble + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(std::string("malformed header: ") + e.what());
  }
  p.payload = bytes.subspan(kPreamble + header_len, body - kPreamble - header_len);
  return p;
}

// Builds a model skeleton from the header; tensor values are filled in later.
Model skeleton(const nlohmann::json& h, std::vector<Tensor>& node_values) {
  require_known_keys(h,
                     {"encoding", "value_shape", "decoder", "keys", "video",
                      "payload_bits", "quantization"},
                     "header");
  const auto vs = read_required<std::vector<std::size_t>>(h, "value_shape", "header");
  if (vs.size() != 3) throw ContainerError("header.value_shape must have 3 entries");
  const FeatureShape shape{vs[0], vs[1], vs[2]};
  const DecoderConfig config = DecoderConfig::from_json(h.at("decoder"));
  const auto keys = read_required<std::vector<double>>(h, "keys", "header");
  const nlohmann::json& video = h.at("video");
  require_known_keys(video, {"length", "init_nodes", "split"}, "header.video");

  std::vector<Bound> nodes;
  node_values.clear();
  for (double k : keys) {
    Tensor v = Tensor::zeros(shape.as_shape(), true);
    node_values.push_back(v);
    nodes.push_back({k, v});
  }
  Model m{TreeGrid::from_preorder(shape, std::move(nodes)), Decoder(config, 0),
          read_required<std::size_t>(video, "length", "header.video"),
          read_required<std::size_t>(video, "init_nodes", "header.video"),
          FrameSplit::kAll};
  const auto split = read_required<std::string>(video, "split", "header.video");
  if (split == "even") {
    m.split = FrameSplit::kEven;
  } else if (split != "all") {
    throw ContainerError("header.video.split: unknown value " + split);
  }
  return m;
}

std::vector<bool> slice(const std::vector<bool>& mask, std::size_t offset, std::size_t n) {
  return {mask.begin() + std::ptrdiff_t(offset), mask.begin() + std::ptrdiff_t(offset + n)};
}

}  // namespace

std::size_t parameter_count(const Model& model) {
  return model.grid.size() * model.grid.value_shape().numel() +
         model.decoder.param_count().with_biases;
}

std::vector<std::uint8_t> encode_float32(const Model& model) {
  const TensorList list = list_tensors(model.grid, model.decoder);
  std::vector<std::uint8_t> payload;
  for (const Tensor& t : list.tensors) {
    for (float x : t.data()) put_u32(payload, std::bit_cast<std::uint32_t>(x));
  }
  nlohmann::json header = base_header(model, Encoding::kFloat32);
  header["payload_bits"] = std::uint64_t(payload.size()) * 8;
  return assemble(header, payload);
}

Compressed compress(const Model& model, const CompressOptions& options) {
  PruneResult pruned = prune_global(model.decoder, options.prune_fraction);
  const std::vector<bool> mask = rle_decode(pruned.mask_runs, pruned.weight_count);
  std::vector<std::size_t> weight_offset;
  {
    std::size_t off = 0;
    for (const Tensor& w : pruned.decoder.weights()) {
      weight_offset.push_back(off);
      off += w.numel();
    }
  }

  const TensorList list = list_tensors(model.grid, pruned.decoder);
  Model out = model.clone();
  const TensorList out_list = list_tensors(out.grid, out.decoder);

  std::vector<std::uint32_t> symbols;
  nlohmann::json quant_tensors = nlohmann::json::array();
  nlohmann::json prune_runs = nlohmann::json::array();
  for (std::size_t i = 0; i < list.tensors.size(); ++i) {
    const QuantizedTensor q = quantize_affine(list.tensors[i], options.bits);
    symbols.insert(symbols.end(), q.symbols.begin(), q.symbols.end());
    quant_tensors.push_back({{"scale", q.params.scale}, {"zero_point", q.params.zero_point}});

    Tensor deq = dequantize(q);
    if (list.weight[i] >= 0) {
      const std::vector<bool> pruned_here =
          slice(mask, weight_offset[std::size_t(list.weight[i])], q.symbols.size());
      // The pruned flags of positions sharing the symbol of 0.0.
      const std::uint32_t zero_symbol = q.params.symbol(0.0f);
      std::vector<bool> sub;
      for (std::size_t k = 0; k < q.symbols.size(); ++k) {
        if (q.symbols[k] == zero_symbol) sub.push_back(pruned_here[k]);
        if (pruned_here[k]) deq[k] = 0.0f;
      }
      prune_runs.push_back(rle_encode(sub));
    }
    Tensor dst = out_list.tensors[i];
    std::copy(deq.data().begin(), deq.data().end(), dst.data().begin());
  }

  const EncodedStream stream = entropy_encode(symbols, options.bits);
  nlohmann::json header = base_header(model, Encoding::kQuantized);
  header["payload_bits"] = stream.bit_length;
  header["quantization"] = {{"bits", options.bits},
                            {"prune_fraction", options.prune_fraction},
                            {"tensors", quant_tensors},
                            {"prune_runs", prune_runs}};

  Compressed result{assemble(header, stream.bytes), std::move(out), {}};
  CompressionReport& r = result.report;
  r.total_bits = std::uint64_t(result.bytes.size()) * 8;
  r.header_bits = std::uint64_t(header.dump().size()) * 8;
  r.payload_bits = stream.bit_length;
  r.key_bits = 64 * std::uint64_t(model.grid.size());
  r.parameter_count = parameter_count(model);
  r.weight_count = pruned.weight_count;
  r.pruned = pruned.pruned;
  return result;
}

Encoding container_encoding(std::span<const std::uint8_t> bytes) {
  const std::string e = parse(bytes).header.value("encoding", "");
  if (e == "float32") return Encoding::kFloat32;
  if (e == "quantized") return Encoding::kQuantized;
  throw ContainerError("unknown encoding '" + e + "'");
}

nlohmann::json read_header(std::span<const std::uint8_t> bytes) {
  return parse(bytes).header;
}

Model decompress(std::span<const std::uint8_t> bytes) {
  const Parsed p = parse(bytes);
  const nlohmann::json& h = p.header;
  const Encoding encoding = container_encoding(bytes);
  try {
    std::vector<Tensor> node_values;
    Model model = skeleton(h, node_values);
    const TensorList list = list_tensors(model.grid, model.decoder);
    std::size_t total = 0;
    for (const Tensor& t : list.tensors) total += t.numel();
    const auto payload_bits = read_required<std::uint64_t>(h, "payload_bits", "header");
    if ((payload_bits + 7) / 8 != p.payload.size()) {
      throw ContainerError("payload is " + std::to_string(p.payload.size()) +
                           " bytes, header declares " + std::to_string(payload_bits) +
                           " bits");
    }

    if (encoding == Encoding::kFloat32) {
      if (payload_bits != std::uint64_t(total) * 32) {
        throw ContainerError("float32 payload size does not match the model");
      }
      std::size_t at = 0;
      for (const Tensor& t : list.tensors) {
        Tensor dst = t;
        for (float& x : dst.data()) {
          x = std::bit_cast<float>(get_u32(p.payload, at));
          at += 4;
        }
      }
      return model;
    }

    const nlohmann::json& qh = h.at("quantization");
    require_known_keys(qh, {"bits", "prune_fraction", "tensors", "prune_runs"},
                       "header.quantization");
    const auto bits = read_required<unsigned>(qh, "bits", "header.quantization");
    const nlohmann::json& qt = qh.at("tensors");
    const nlohmann::json& runs = qh.at("prune_runs");
    const std::vector<std::uint32_t> symbols = entropy_decode(p.payload, payload_bits);
    if (symbols.size() != total || qt.size() != list.tensors.size()) {
      throw ContainerError("payload holds " + std::to_string(symbols.size()) +
                           " symbols for " + std::to_string(total) + " parameters");
    }
    std::size_t at = 0;
    std::size_t weight_i = 0;
    for (std::size_t i = 0; i < list.tensors.size(); ++i) {
      Tensor dst = list.tensors[i];
      QuantizedTensor q;
      q.shape = dst.shape();
      q.params.bits = bits;
      q.params.scale = read_required<double>(qt[i], "scale", "header.quantization.tensors");
      q.params.zero_point =
          read_required<double>(qt[i], "zero_point", "header.quantization.tensors");
      q.symbols.assign(symbols.begin() + std::ptrdiff_t(at),
                       symbols.begin() + std::ptrdiff_t(at + dst.numel()));
      at += dst.numel();
      const Tensor deq = dequantize(q);
      std::copy(deq.data().begin(), deq.data().end(), dst.data().begin());
      if (list.weight[i] < 0) continue;

      const std::uint32_t zero_symbol = q.params.symbol(0.0f);
      const std::size_t candidates = std::size_t(
          std::count(q.symbols.begin(), q.symbols.end(), zero_symbol));
      const auto r = runs.at(weight_i++).get<std::vector<std::uint64_t>>();
      const std::vector<bool> sub = rle_decode(r, candidates);
      std::size_t c = 0;
      for (std::size_t k = 0; k < q.symbols.size(); ++k) {
        if (q.symbols[k] != zero_symbol) continue;
        if (sub[c++]) dst[k] = 0.0f;
      }
    }
    return model;
  } catch (const DecodeError& e) {
    throw ContainerError(std::string("payload: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(std::string("malformed header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ContainerError(std::string("invalid header: ") + e.what());
  }
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace treenerv
