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

// Canonical Huffman coding of bounded-width symbol streams.
//
// Stream layout, MSB-first:
//   count (32) | width (5) | [table flag (1) | table | codes]   (empty when count = 0)
// The table is either a dense list of 5-bit code lengths for every symbol in
// [0, 2^width) or a sparse list of (symbol, length) pairs, whichever is
// shorter. A stream with one distinct symbol codes it with a single bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace treenerv {

class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::uint64_t bit_offset);
  std::uint64_t bit_offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class BitWriter {
 public:
  void write(std::uint64_t value, unsigned nbits);
  std::uint64_t bit_length() const { return bits_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_length);
  std::uint64_t read(unsigned nbits);
  unsigned read_bit();
  std::uint64_t position() const { return pos_; }
  std::uint64_t remaining() const { return length_ - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t length_;
  std::uint64_t pos_ = 0;
};

inline constexpr unsigned kMaxCodeLength = 24;

// Code lengths per symbol (0 for absent symbols), limited to kMaxCodeLength.
std::vector<unsigned> huffman_code_lengths(std::span<const std::uint64_t> histogram);

struct EncodedStream {
  std::vector<std::uint8_t> bytes;
  std::uint64_t bit_length = 0;
  std::uint64_t table_bits = 0;  // count, width and code table
  std::uint64_t code_bits = 0;   // symbol codes only
};

// Every symbol must be < 2^width, width in [1, 16].
EncodedStream entropy_encode(std::span<const std::uint32_t> symbols, unsigned width);
// Decodes a whole stream; throws DecodeError on any inconsistency.
std::vector<std::uint32_t> entropy_decode(std::span<const std::uint8_t> bytes,
                                          std::uint64_t bit_length);

}  // namespace treenerv
