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

// AVL-balanced search tree over temporal keys whose values are trainable
// feature tensors. Queries return the closest keys bracketing a time and
// interpolate their values into a time embedding.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treenerv/feature_shape.hpp"
#include "treenerv/tensor.hpp"

namespace treenerv {

struct FeatureNode {
  double key = 0.0;
  Tensor value;
  int height = 0;  // a leaf has height 0
  std::unique_ptr<FeatureNode> left;
  std::unique_ptr<FeatureNode> right;
};

struct Bound {
  double key = 0.0;
  Tensor value;
};

struct BoundPair {
  Bound lower;
  Bound upper;
  std::size_t visited = 0;  // nodes inspected by the descent

  bool single() const { return lower.key == upper.key; }
};

struct ValidationReport {
  bool ok = true;
  std::string message;  // first violated invariant, empty on success

  explicit operator bool() const { return ok; }
};

class TreeGrid {
 public:
  using ValueInit = std::function<Tensor(std::size_t index, const FeatureShape&)>;

  explicit TreeGrid(FeatureShape value_shape);

  TreeGrid(TreeGrid&&) noexcept = default;
  TreeGrid& operator=(TreeGrid&&) noexcept = default;

  // N keys at i * (L - 1) / (N - 1), both ends included. Values default to
  // uniform noise in [-1e-2, 1e-2] drawn from `seed`.
  static TreeGrid from_uniform(std::size_t length, std::size_t nodes,
                               FeatureShape value_shape, std::uint64_t seed = 0,
                               const ValueInit& init = {});

  // Rebuilds the exact shape of a tree from its pre-order listing. Throws if
  // the result is not a valid AVL tree.
  static TreeGrid from_preorder(FeatureShape value_shape,
                                std::vector<Bound> nodes);

  // Deep copy; values are cloned into fresh trainable tensors.
  TreeGrid clone() const;

  BoundPair query_bounds(double t) const;
  Tensor time_embedding(double t, Tape* tape = nullptr) const;

  // Interpolation weights (lower, upper) for `t` between the pair's keys.
  static std::pair<double, double> interpolation_weights(const BoundPair& b,
                                                         double t);
  static Tensor interpolate(const BoundPair& bounds, double t,
                            Tape* tape = nullptr);

  void insert(double key, Tensor value);

  // Inserts (k_lower + k_upper) / 2 with its interpolated value and returns
  // the new key. The two keys must be adjacent existing keys.
  double midpoint_insert(double k_lower, double k_upper);

  std::vector<double> in_order_keys() const;
  std::vector<const FeatureNode*> preorder() const;
  std::vector<Tensor> values_in_order() const;
  ValidationReport validate() const;

  const FeatureNode* root() const { return root_.get(); }
  FeatureNode* find(double key);
  const FeatureNode* find(double key) const;

  std::size_t size() const { return node_count_; }
  bool empty() const { return node_count_ == 0; }
  int height() const { return root_ ? root_->height : -1; }
  const FeatureShape& value_shape() const { return value_shape_; }

 private:
  FeatureShape value_shape_;
  std::unique_ptr<FeatureNode> root_;
  std::size_t node_count_ = 0;
};

// Parenthesized structure, e.g. "4(2(1,3),6(-,7))". Keys use %g.
std::string structure_string(const TreeGrid& grid);

}  // namespace treenerv
