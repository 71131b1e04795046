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

#include "treenerv/huffman.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace treenerv {

DecodeError::DecodeError(const std::string& what, std::uint64_t bit_offset)
    : std::runtime_error(what + " at bit " + std::to_string(bit_offset)),
      offset_(bit_offset) {}

void BitWriter::write(std::uint64_t value, unsigned nbits) {
  for (unsigned i = nbits; i-- > 0;) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((value >> i) & 1u) bytes_.back() |= std::uint8_t(0x80u >> (bits_ % 8));
    ++bits_;
  }
}

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_length)
    : bytes_(bytes), length_(bit_length) {
  if (bit_length > std::uint64_t(bytes.size()) * 8) {
    throw DecodeError("declared bit length exceeds the buffer", bytes.size() * 8);
  }
}

unsigned BitReader::read_bit() {
  if (pos_ >= length_) throw DecodeError("unexpected end of stream", pos_);
  const unsigned bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
  ++pos_;
  return bit;
}

std::uint64_t BitReader::read(unsigned nbits) {
  if (remaining() < nbits) throw DecodeError("unexpected end of stream", pos_);
  std::uint64_t v = 0;
  for (unsigned i = 0; i < nbits; ++i) v = (v << 1) | read_bit();
  return v;
}

namespace {

constexpr unsigned kCountBits = 32;
constexpr unsigned kWidthBits = 5;
constexpr unsigned kLengthBits = 5;

std::vector<unsigned> unlimited_lengths(std::span<const std::uint64_t> hist) {
  std::vector<unsigned> lengths(hist.size(), 0);
  // (weight, creation order, node); order breaks ties deterministically.
  using Item = std::tuple<std::uint64_t, std::size_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<std::size_t> parent;
  std::size_t order = 0;
  std::vector<std::size_t> leaf_node(hist.size(), 0);
  for (std::size_t s = 0; s < hist.size(); ++s) {
    if (hist[s] == 0) continue;
    leaf_node[s] = parent.size();
    parent.push_back(0);
    heap.emplace(hist[s], order++, leaf_node[s]);
  }
  if (parent.empty()) return lengths;
  if (parent.size() == 1) {
    for (std::size_t s = 0; s < hist.size(); ++s) {
      if (hist[s] != 0) lengths[s] = 1;
    }
    return lengths;
  }
  while (heap.size() > 1) {
    const auto [wa, oa, a] = heap.top();
    heap.pop();
    const auto [wb, ob, b] = heap.top();
    heap.pop();
    const std::size_t node = parent.size();
    parent.push_back(node);  // root points at itself until merged
    parent[a] = node;
    parent[b] = node;
    heap.emplace(wa + wb, order++, node);
  }
  const std::size_t root = std::get<2>(heap.top());
  parent[root] = root;
  for (std::size_t s = 0; s < hist.size(); ++s) {
    if (hist[s] == 0) continue;
    unsigned depth = 0;
    for (std::size_t n = leaf_node[s]; n != root; n = parent[n]) ++depth;
    lengths[s] = depth;
  }
  return lengths;
}

struct CanonicalCode {
  std::vector<std::uint32_t> code;  // per symbol
};

CanonicalCode assign_codes(const std::vector<unsigned>& lengths) {
  std::vector<std::uint32_t> order;
  for (std::uint32_t s = 0; s < lengths.size(); ++s) {
    if (lengths[s] != 0) order.push_back(s);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return lengths[a] < lengths[b]; });
  CanonicalCode c{std::vector<std::uint32_t>(lengths.size(), 0)};
  std::uint32_t code = 0;
  unsigned len = order.empty() ? 0 : lengths[order.front()];
  for (std::uint32_t s : order) {
    code <<= (lengths[s] - len);
    len = lengths[s];
    c.code[s] = code++;
  }
  return c;
}

}  // namespace

std::vector<unsigned> huffman_code_lengths(std::span<const std::uint64_t> histogram) {
  std::vector<std::uint64_t> hist(histogram.begin(), histogram.end());
  for (;;) {
    std::vector<unsigned> lengths = unlimited_lengths(hist);
    if (*std::max_element(lengths.begin(), lengths.end()) <= kMaxCodeLength) {
      return lengths;
    }
    // Flatten the distribution and retry; present symbols stay present.
    for (std::uint64_t& h : hist) {
      if (h != 0) h = (h + 1) / 2;
    }
  }
}

EncodedStream entropy_encode(std::span<const std::uint32_t> symbols, unsigned width) {
  if (width < 1 || width > 16) {
    throw std::invalid_argument("entropy_encode: width must be in [1, 16], got " +
                                std::to_string(width));
  }
  if (symbols.size() >= (std::uint64_t{1} << kCountBits)) {
    throw std::invalid_argument("entropy_encode: stream too long");
  }
  const std::size_t alphabet = std::size_t{1} << width;
  std::vector<std::uint64_t> hist(alphabet, 0);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] >= alphabet) {
      throw std::invalid_argument("entropy_encode: symbol " + std::to_string(symbols[i]) +
                                  " at index " + std::to_string(i) + " exceeds width " +
                                  std::to_string(width));
    }
    ++hist[symbols[i]];
  }

  BitWriter w;
  w.write(symbols.size(), kCountBits);
  w.write(width, kWidthBits);
  EncodedStream out;
  if (symbols.empty()) {
    out.table_bits = w.bit_length();
    out.bit_length = w.bit_length();
    out.bytes = w.take();
    return out;
  }

  const std::vector<unsigned> lengths = huffman_code_lengths(hist);
  const std::size_t distinct =
      std::size_t(std::count_if(lengths.begin(), lengths.end(), [](unsigned l) { return l; }));
  const std::uint64_t dense_bits = std::uint64_t(alphabet) * kLengthBits;
  const std::uint64_t sparse_bits = (width + 1) + distinct * (width + kLengthBits);
  if (sparse_bits < dense_bits) {
    w.write(1, 1);
    w.write(distinct, width + 1);
    for (std::size_t s = 0; s < alphabet; ++s) {
      if (lengths[s] == 0) continue;
      w.write(s, width);
      w.write(lengths[s], kLengthBits);
    }
  } else {
    w.write(0, 1);
    for (unsigned l : lengths) w.write(l, kLengthBits);
  }
  out.table_bits = w.bit_length();

  const CanonicalCode canon = assign_codes(lengths);
  for (std::uint32_t s : symbols) w.write(canon.code[s], lengths[s]);
  out.bit_length = w.bit_length();
  out.code_bits = out.bit_length - out.table_bits;
  out.bytes = w.take();
  return out;
}

std::vector<std::uint32_t> entropy_decode(std::span<const std::uint8_t> bytes,
                                          std::uint64_t bit_length) {
  BitReader r(bytes, bit_length);
  const std::uint64_t count = r.read(kCountBits);
  const std::uint64_t width_at = r.position();
  const auto width = unsigned(r.read(kWidthBits));
  if (width < 1 || width > 16) throw DecodeError("invalid symbol width", width_at);
  std::vector<std::uint32_t> symbols;
  if (count == 0) {
    if (r.remaining() != 0) throw DecodeError("trailing bits", r.position());
    return symbols;
  }

  const std::size_t alphabet = std::size_t{1} << width;
  std::vector<unsigned> lengths(alphabet, 0);
  if (r.read_bit() == 1) {
    const std::uint64_t at = r.position();
    const std::uint64_t distinct = r.read(width + 1);
    if (distinct == 0 || distinct > alphabet) throw DecodeError("invalid table size", at);
    std::int64_t previous = -1;
    for (std::uint64_t i = 0; i < distinct; ++i) {
      const std::uint64_t sym_at = r.position();
      const auto s = std::int64_t(r.read(width));
      if (s <= previous) throw DecodeError("table symbols out of order", sym_at);
      previous = s;
      lengths[std::size_t(s)] = unsigned(r.read(kLengthBits));
      if (lengths[std::size_t(s)] == 0) throw DecodeError("zero code length", sym_at);
    }
  } else {
    for (unsigned& l : lengths) l = unsigned(r.read(kLengthBits));
  }

  // Kraft sum in units of 2^-kMaxCodeLength.
  std::uint64_t kraft = 0;
  std::vector<std::uint32_t> per_length(kMaxCodeLength + 1, 0);
  for (unsigned l : lengths) {
    if (l == 0) continue;
    if (l > kMaxCodeLength) throw DecodeError("code length too long", r.position());
    kraft += std::uint64_t{1} << (kMaxCodeLength - l);
    ++per_length[l];
  }
  if (kraft == 0 || kraft > (std::uint64_t{1} << kMaxCodeLength)) {
    throw DecodeError("code lengths violate the prefix condition", r.position());
  }

  std::vector<std::uint32_t> sorted;
  for (std::uint32_t s = 0; s < alphabet; ++s) {
    if (lengths[s] != 0) sorted.push_back(s);
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return lengths[a] < lengths[b]; });
  std::vector<std::uint32_t> first_code(kMaxCodeLength + 2, 0);
  std::vector<std::uint32_t> first_index(kMaxCodeLength + 2, 0);
  std::uint32_t code = 0;
  std::uint32_t index = 0;
  for (unsigned l = 1; l <= kMaxCodeLength; ++l) {
    first_code[l] = code;
    first_index[l] = index;
    code = (code + per_length[l]) << 1;
    index += per_length[l];
  }

  symbols.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t at = r.position();
    std::uint32_t c = 0;
    bool found = false;
    for (unsigned l = 1; l <= kMaxCodeLength; ++l) {
      c = (c << 1) | r.read_bit();
      if (c - first_code[l] < per_length[l] && c >= first_code[l]) {
        symbols.push_back(sorted[first_index[l] + (c - first_code[l])]);
        found = true;
        break;
      }
    }
    if (!found) throw DecodeError("invalid code for symbol " + std::to_string(i), at);
  }
  if (r.remaining() != 0) throw DecodeError("trailing bits", r.position());
  return symbols;
}

}  // namespace treenerv
