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

// Serialized model files.
//
// Little-endian layout:
//   "TNRV" | version u32 | header_len u32 | header JSON | payload | crc32 u32
// The CRC covers every byte before it. The payload holds either raw float32
// parameters or one Huffman stream of quantized symbols; see docs/container.md.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "treenerv/trainer.hpp"

namespace treenerv {

inline constexpr std::uint32_t kContainerVersion = 1;

class ContainerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Encoding { kFloat32, kQuantized };

struct CompressOptions {
  double prune_fraction = 0.1;
  unsigned bits = 8;
};

struct CompressionReport {
  std::uint64_t total_bits = 0;    // whole file
  std::uint64_t header_bits = 0;   // JSON header
  std::uint64_t payload_bits = 0;  // entropy-coded stream, table included
  std::uint64_t key_bits = 0;      // 64 per tree node, held in the header
  std::size_t parameter_count = 0; // tree values + decoder weights and biases
  std::size_t weight_count = 0;
  std::size_t pruned = 0;
};

struct Compressed {
  std::vector<std::uint8_t> bytes;
  // The dequantized model the bytes decode to.
  Model model;
  CompressionReport report;
};

// Lossless float32 container.
std::vector<std::uint8_t> encode_float32(const Model& model);
// Prune, quantize every tensor, entropy-code.
Compressed compress(const Model& model, const CompressOptions& options = {});
// Decodes either encoding. Quantized containers yield dequantized values.
Model decompress(std::span<const std::uint8_t> bytes);

Encoding container_encoding(std::span<const std::uint8_t> bytes);
nlohmann::json read_header(std::span<const std::uint8_t> bytes);

std::size_t parameter_count(const Model& model);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace treenerv
