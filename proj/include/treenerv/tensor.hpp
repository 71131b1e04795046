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

// Dense float32 tensors with reverse-mode differentiation.
//
// A Tensor is a shared handle: copying it aliases the same storage, the same
// way a parameter is shared between a model and the tape that differentiates
// it. Use clone() for an independent copy.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace treenerv {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Raised for any operand whose shape does not fit the operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
struct TensorStorage;
}

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, float value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<float> data,
                          bool requires_grad = false);

  bool defined() const { return storage_ != nullptr; }
  explicit operator bool() const { return defined(); }

  const Shape& shape() const;
  std::size_t numel() const;
  std::size_t dim(std::size_t axis) const { return shape().at(axis); }

  std::span<float> data();
  std::span<const float> data() const;
  float& operator[](std::size_t i) { return data()[i]; }
  float operator[](std::size_t i) const { return data()[i]; }

  bool requires_grad() const;
  void set_requires_grad(bool on);

  bool has_grad() const;
  // Zero-initialized on first access.
  std::span<float> grad();
  std::span<const float> grad() const;
  void zero_grad();
  void drop_grad();

  // Deep copy of shape and data; the copy does not require grad.
  Tensor clone() const;

  // Stable identity of the underlying storage.
  const void* id() const { return storage_.get(); }
  bool same_storage(const Tensor& other) const {
    return storage_ == other.storage_;
  }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorStorage> storage)
      : storage_(std::move(storage)) {}

  std::shared_ptr<detail::TensorStorage> storage_;
};

// Loss value carried in 64 bits alongside the taped one-element node.
struct Scalar {
  double value = 0.0;
  Tensor node;
};

class Tape {
 public:
  using Backward = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(Tensor output, Backward backward);

  // Seeds d(loss)/d(loss) = 1, replays the tape in reverse and clears it.
  // Throws std::logic_error when `loss` was not produced on this tape.
  void backward(const Scalar& loss);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); }

 private:
  struct Entry {
    Tensor output;
    Backward backward;
  };
  std::vector<Entry> entries_;
};

// ---- differentiable operations ---------------------------------------------
//
// Each op records itself on `tape` when the tape is non-null and at least one
// input requires grad; otherwise it is a plain forward computation.

// Stride-1 cross-correlation, zero padding k/2. input C_in x h x w,
// weight C_out x C_in x k x k with k in {1, 3}, bias C_out.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              Tape* tape = nullptr);

// (C*S*S) x h x w -> C x (h*S) x (w*S), channel-major sub-pixel layout.
Tensor pixel_shuffle(const Tensor& input, std::size_t upscale,
                     Tape* tape = nullptr);

Tensor gelu(const Tensor& input, Tape* tape = nullptr);
Tensor sigmoid(const Tensor& input, Tape* tape = nullptr);

// w_lower * lower + w_upper * upper; the weights are constants.
Tensor lerp_combine(const Tensor& lower, const Tensor& upper, double w_lower,
                    double w_upper, Tape* tape = nullptr);

// h x w x d -> d x h x w
Tensor hwc_to_chw(const Tensor& input, Tape* tape = nullptr);

Scalar mse_loss(const Tensor& pred, const Tensor& target, Tape* tape = nullptr);
Scalar sum(const Tensor& input, Tape* tape = nullptr);

}  // namespace treenerv
