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
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

#include "treenerv/tree_grid.hpp"

namespace treenerv {

namespace {

using NodePtr = std::unique_ptr<FeatureNode>;

int height_of(const NodePtr& node) { return node ? node->height : -1; }

void update_height(FeatureNode& node) {
  node.height = 1 + std::max(height_of(node.left), height_of(node.right));
}

int balance_of(const FeatureNode& node) {
  return height_of(node.left) - height_of(node.right);
}

NodePtr rotate_right(NodePtr top) {
  NodePtr pivot = std::move(top->left);
  top->left = std::move(pivot->right);
  update_height(*top);
  pivot->right = std::move(top);
  update_height(*pivot);
  return pivot;
}

NodePtr rotate_left(NodePtr top) {
  NodePtr pivot = std::move(top->right);
  top->right = std::move(pivot->left);
  update_height(*top);
  pivot->left = std::move(top);
  update_height(*pivot);
  return pivot;
}

// Imbalance cases by (node beta, child beta):
//   > 1, child >= 0  right rotation
//   > 1, child <  0  left rotation at child, then right rotation
//   <-1, child <= 0  left rotation
//   <-1, child >  0  right rotation at child, then left rotation
NodePtr rebalance(NodePtr node) {
  update_height(*node);
  const int beta = balance_of(*node);
  if (beta > 1) {
    if (balance_of(*node->left) < 0) node->left = rotate_left(std::move(node->left));
    return rotate_right(std::move(node));
  }
  if (beta < -1) {
    if (balance_of(*node->right) > 0) node->right = rotate_right(std::move(node->right));
    return rotate_left(std::move(node));
  }
  return node;
}

NodePtr insert_balanced(NodePtr node, double key, Tensor& value) {
  if (!node) {
    auto leaf = std::make_unique<FeatureNode>();
    leaf->key = key;
    leaf->value = std::move(value);
    return leaf;
  }
  if (key < node->key) {
    node->left = insert_balanced(std::move(node->left), key, value);
  } else {
    node->right = insert_balanced(std::move(node->right), key, value);
  }
  return rebalance(std::move(node));
}

int recompute_heights(FeatureNode* node) {
  if (node == nullptr) return -1;
  node->height = 1 + std::max(recompute_heights(node->left.get()),
                              recompute_heights(node->right.get()));
  return node->height;
}

std::string format_key(double key) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", key);
  return buf;
}

// Returns the true height, or reports the first violation into `report`.
int check_subtree(const FeatureNode* node, double lo, double hi,
                  const FeatureShape& shape, std::size_t& count,
                  ValidationReport& report) {
  if (node == nullptr || !report.ok) return -1;
  ++count;
  auto fail = [&](std::string msg) {
    report.ok = false;
    report.message = std::move(msg);
    return -1;
  };
  if (!std::isfinite(node->key)) return fail("non-finite key");
  if (!(node->key > lo && node->key < hi)) {
    return fail("BST order violated at key " + format_key(node->key));
  }
  if (!node->value.defined() || node->value.shape() != shape.as_shape()) {
    return fail("value shape mismatch at key " + format_key(node->key));
  }
  const int hl = check_subtree(node->left.get(), lo, node->key, shape, count, report);
  if (!report.ok) return -1;
  const int hr = check_subtree(node->right.get(), node->key, hi, shape, count, report);
  if (!report.ok) return -1;
  const int h = 1 + std::max(hl, hr);
  if (node->height != h) {
    return fail("height mismatch at key " + format_key(node->key) + ": stored " +
                std::to_string(node->height) + ", actual " + std::to_string(h));
  }
  if (std::abs(hl - hr) > 1) {
    return fail("balance factor " + std::to_string(hl - hr) + " at key " +
                format_key(node->key));
  }
  return h;
}

Tensor default_value(std::mt19937_64& rng, const FeatureShape& shape) {
  std::uniform_real_distribution<float> dist(-1e-2f, 1e-2f);
  std::vector<float> data(shape.numel());
  for (float& x : data) x = dist(rng);
  return Tensor::from_data(shape.as_shape(), std::move(data), true);
}

}  // namespace

TreeGrid::TreeGrid(FeatureShape value_shape) : value_shape_(value_shape) {}

TreeGrid TreeGrid::from_uniform(std::size_t length, std::size_t nodes,
                                FeatureShape value_shape, std::uint64_t seed,
                                const ValueInit& init) {
  if (nodes < 2) {
    throw std::invalid_argument("from_uniform: need at least 2 nodes, got " +
                                std::to_string(nodes));
  }
  if (nodes > length) {
    throw std::invalid_argument("from_uniform: " + std::to_string(nodes) +
                                " nodes exceed sequence length " +
                                std::to_string(length));
  }
  TreeGrid grid(value_shape);
  std::mt19937_64 rng(seed);
  const double span = double(length - 1);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double key = double(i) * span / double(nodes - 1);
    Tensor value = init ? init(i, value_shape) : default_value(rng, value_shape);
    value.set_requires_grad(true);
    grid.insert(key, std::move(value));
  }
  return grid;
}

TreeGrid TreeGrid::from_preorder(FeatureShape value_shape,
                                 std::vector<Bound> nodes) {
  TreeGrid grid(value_shape);
  for (Bound& entry : nodes) {
    NodePtr* slot = &grid.root_;
    while (*slot) {
      if (entry.key == (*slot)->key) {
        throw std::invalid_argument("from_preorder: duplicate key " +
                                    format_key(entry.key));
      }
      slot = entry.key < (*slot)->key ? &(*slot)->left : &(*slot)->right;
    }
    *slot = std::make_unique<FeatureNode>();
    (*slot)->key = entry.key;
    (*slot)->value = std::move(entry.value);
    ++grid.node_count_;
  }
  recompute_heights(grid.root_.get());
  if (ValidationReport report = grid.validate(); !report) {
    throw std::invalid_argument("from_preorder: " + report.message);
  }
  return grid;
}

TreeGrid TreeGrid::clone() const {
  std::vector<Bound> nodes;
  for (const FeatureNode* node : preorder()) {
    Tensor copy = node->value.clone();
    copy.set_requires_grad(true);
    nodes.push_back({node->key, std::move(copy)});
  }
  return from_preorder(value_shape_, std::move(nodes));
}

BoundPair TreeGrid::query_bounds(double t) const {
  if (!root_) throw std::logic_error("query_bounds: empty tree");
  if (std::isnan(t)) throw std::invalid_argument("query_bounds: NaN time");
  const FeatureNode* lower = nullptr;
  const FeatureNode* upper = nullptr;
  std::size_t visited = 0;
  for (const FeatureNode* node = root_.get(); node != nullptr;) {
    ++visited;
    if (t == node->key) {
      lower = upper = node;
      break;
    }
    if (t < node->key) {
      upper = node;
      node = node->left.get();
    } else {
      lower = node;
      node = node->right.get();
    }
  }
  // Outside [min key, max key]: clamp to the nearest node.
  if (lower == nullptr) lower = upper;
  if (upper == nullptr) upper = lower;
  return BoundPair{{lower->key, lower->value}, {upper->key, upper->value}, visited};
}

std::pair<double, double> TreeGrid::interpolation_weights(const BoundPair& b,
                                                          double t) {
  if (b.single()) return {1.0, 0.0};
  const double d_lower = std::abs(t - b.lower.key);
  const double d_upper = std::abs(b.upper.key - t);
  const double total = d_lower + d_upper;
  return {d_upper / total, d_lower / total};
}

Tensor TreeGrid::interpolate(const BoundPair& bounds, double t, Tape* tape) {
  if (bounds.single()) return bounds.lower.value;
  const auto [w_lower, w_upper] = interpolation_weights(bounds, t);
  return lerp_combine(bounds.lower.value, bounds.upper.value, w_lower, w_upper,
                      tape);
}

Tensor TreeGrid::time_embedding(double t, Tape* tape) const {
  return interpolate(query_bounds(t), t, tape);
}

void TreeGrid::insert(double key, Tensor value) {
  if (!std::isfinite(key)) throw std::invalid_argument("insert: non-finite key");
  if (!value.defined() || value.shape() != value_shape_.as_shape()) {
    throw ShapeError("insert: value shape " +
                     (value.defined() ? shape_string(value.shape()) : "<undefined>") +
                     " does not match grid value shape " +
                     shape_string(value_shape_.as_shape()));
  }
  if (find(key) != nullptr) {
    throw std::invalid_argument("insert: duplicate key " + format_key(key));
  }
  root_ = insert_balanced(std::move(root_), key, value);
  ++node_count_;
}

double TreeGrid::midpoint_insert(double k_lower, double k_upper) {
  if (!(k_lower < k_upper) || find(k_lower) == nullptr ||
      find(k_upper) == nullptr) {
    throw std::invalid_argument("midpoint_insert: (" + format_key(k_lower) +
                                ", " + format_key(k_upper) +
                                ") are not existing keys in increasing order");
  }
  const double mid = 0.5 * (k_lower + k_upper);
  const BoundPair bounds = query_bounds(mid);
  if (bounds.lower.key != k_lower || bounds.upper.key != k_upper) {
    throw std::invalid_argument("midpoint_insert: keys " + format_key(k_lower) +
                                " and " + format_key(k_upper) +
                                " are not adjacent");
  }
  Tensor value = interpolate(bounds, mid).clone();
  value.set_requires_grad(true);
  insert(mid, std::move(value));
  return mid;
}

std::vector<double> TreeGrid::in_order_keys() const {
  std::vector<double> keys;
  keys.reserve(node_count_);
  std::vector<const FeatureNode*> stack;
  const FeatureNode* node = root_.get();
  while (node != nullptr || !stack.empty()) {
    while (node != nullptr) {
      stack.push_back(node);
      node = node->left.get();
    }
    node = stack.back();
    stack.pop_back();
    keys.push_back(node->key);
    node = node->right.get();
  }
  return keys;
}

std::vector<const FeatureNode*> TreeGrid::preorder() const {
  std::vector<const FeatureNode*> out;
  out.reserve(node_count_);
  std::vector<const FeatureNode*> stack;
  if (root_) stack.push_back(root_.get());
  while (!stack.empty()) {
    const FeatureNode* node = stack.back();
    stack.pop_back();
    out.push_back(node);
    if (node->right) stack.push_back(node->right.get());
    if (node->left) stack.push_back(node->left.get());
  }
  return out;
}

std::vector<Tensor> TreeGrid::values_in_order() const {
  std::vector<Tensor> values;
  values.reserve(node_count_);
  for (double key : in_order_keys()) values.push_back(find(key)->value);
  return values;
}

ValidationReport TreeGrid::validate() const {
  ValidationReport report;
  std::size_t count = 0;
  constexpr double inf = std::numeric_limits<double>::infinity();
  check_subtree(root_.get(), -inf, inf, value_shape_, count, report);
  if (report.ok && count != node_count_) {
    report.ok = false;
    report.message = "node_count " + std::to_string(node_count_) +
                     " but " + std::to_string(count) + " reachable nodes";
  }
  return report;
}

FeatureNode* TreeGrid::find(double key) {
  return const_cast<FeatureNode*>(std::as_const(*this).find(key));
}

const FeatureNode* TreeGrid::find(double key) const {
  const FeatureNode* node = root_.get();
  while (node != nullptr && node->key != key) {
    node = key < node->key ? node->left.get() : node->right.get();
  }
  return node;
}

namespace {

void append_structure(const FeatureNode* node, std::string& out) {
  if (node == nullptr) {
    out += '-';
    return;
  }
  out += format_key(node->key);
  if (!node->left && !node->right) return;
  out += '(';
  append_structure(node->left.get(), out);
  out += ',';
  append_structure(node->right.get(), out);
  out += ')';
}

}  // namespace

std::string structure_string(const TreeGrid& grid) {
  std::string out;
  if (grid.root() != nullptr) append_structure(grid.root(), out);
  return out;
}

}  // namespace treenerv
