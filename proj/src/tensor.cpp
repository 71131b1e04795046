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
#include <sstream>
#include <stdexcept>

#include "treenerv/tensor.hpp"

namespace treenerv {

namespace detail {

struct TensorStorage {
  Shape shape;
  std::vector<float> data;
  std::vector<float> grad;  // empty until first requested
  bool requires_grad = false;
};

}  // namespace detail

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return filled(std::move(shape), 0.0f, requires_grad);
}

Tensor Tensor::filled(Shape shape, float value, bool requires_grad) {
  auto storage = std::make_shared<detail::TensorStorage>();
  storage->data.assign(shape_numel(shape), value);
  storage->shape = std::move(shape);
  storage->requires_grad = requires_grad;
  return Tensor(std::move(storage));
}

Tensor Tensor::from_data(Shape shape, std::vector<float> data,
                         bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    throw ShapeError("tensor shape " + shape_string(shape) + " needs " +
                     std::to_string(shape_numel(shape)) + " elements, got " +
                     std::to_string(data.size()));
  }
  auto storage = std::make_shared<detail::TensorStorage>();
  storage->shape = std::move(shape);
  storage->data = std::move(data);
  storage->requires_grad = requires_grad;
  return Tensor(std::move(storage));
}

const Shape& Tensor::shape() const { return storage_->shape; }
std::size_t Tensor::numel() const { return storage_->data.size(); }

std::span<float> Tensor::data() { return storage_->data; }
std::span<const float> Tensor::data() const { return storage_->data; }

bool Tensor::requires_grad() const {
  return storage_ != nullptr && storage_->requires_grad;
}
void Tensor::set_requires_grad(bool on) { storage_->requires_grad = on; }

bool Tensor::has_grad() const { return !storage_->grad.empty(); }

std::span<float> Tensor::grad() {
  if (storage_->grad.empty()) storage_->grad.assign(numel(), 0.0f);
  return storage_->grad;
}

std::span<const float> Tensor::grad() const { return storage_->grad; }

void Tensor::zero_grad() {
  std::fill(storage_->grad.begin(), storage_->grad.end(), 0.0f);
}

void Tensor::drop_grad() {
  storage_->grad.clear();
  storage_->grad.shrink_to_fit();
}

Tensor Tensor::clone() const {
  return from_data(shape(), storage_->data, false);
}

void Tape::record(Tensor output, Backward backward) {
  entries_.push_back(Entry{std::move(output), std::move(backward)});
}

void Tape::backward(const Scalar& loss) {
  const bool taped =
      loss.node.defined() &&
      std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) {
        return e.output.same_storage(loss.node);
      });
  if (!taped) {
    throw std::logic_error("backward called on a value not recorded on this tape");
  }
  Tensor seed = loss.node;
  std::span<float> g = seed.grad();
  std::fill(g.begin(), g.end(), 1.0f);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (!it->output.has_grad()) continue;  // not reachable from the loss
    it->backward();
  }
  entries_.clear();
}

}  // namespace treenerv
