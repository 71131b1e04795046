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

#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <utility>

#include "treenerv/kernels/kernels.hpp"
#include "treenerv/tensor.hpp"

namespace treenerv {

namespace {

bool should_record(Tape* tape, std::initializer_list<const Tensor*> inputs) {
  if (tape == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (!t.defined()) throw ShapeError(std::string(what) + ": undefined tensor");
  if (t.shape().size() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got shape " +
                     shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.defined() || !b.defined() || a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " +
                     (a.defined() ? shape_string(a.shape()) : "<undefined>") +
                     " vs " +
                     (b.defined() ? shape_string(b.shape()) : "<undefined>"));
  }
}

// Column buffer of a 3x3 same-padded convolution: row (ci, ky, kx), column
// (y, x).
std::vector<float> im2col3(std::span<const float> in, std::size_t channels,
                           std::size_t h, std::size_t w) {
  const std::size_t plane = h * w;
  std::vector<float> col(channels * 9 * plane, 0.0f);
  for (std::size_t ci = 0; ci < channels; ++ci) {
    const float* src = in.data() + ci * plane;
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        float* dst = col.data() + ((ci * 3 + ky) * 3 + kx) * plane;
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = std::ptrdiff_t(y + ky) - 1;
          if (sy < 0 || sy >= std::ptrdiff_t(h)) continue;
          const std::size_t x_begin = kx == 0 ? 1 : 0;
          const std::size_t x_end = kx == 2 ? w - 1 : w;
          const float* row = src + std::size_t(sy) * w;
          for (std::size_t x = x_begin; x < x_end; ++x) {
            dst[y * w + x] = row[x + kx - 1];
          }
        }
      }
    }
  }
  return col;
}

void col2im3(std::span<const float> col, std::size_t channels, std::size_t h,
             std::size_t w, std::span<float> out) {
  const std::size_t plane = h * w;
  for (std::size_t ci = 0; ci < channels; ++ci) {
    float* dst = out.data() + ci * plane;
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        const float* src = col.data() + ((ci * 3 + ky) * 3 + kx) * plane;
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = std::ptrdiff_t(y + ky) - 1;
          if (sy < 0 || sy >= std::ptrdiff_t(h)) continue;
          const std::size_t x_begin = kx == 0 ? 1 : 0;
          const std::size_t x_end = kx == 2 ? w - 1 : w;
          float* row = dst + std::size_t(sy) * w;
          for (std::size_t x = x_begin; x < x_end; ++x) {
            row[x + kx - 1] += src[y * w + x];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              Tape* tape) {
  require_rank(input, 3, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  require_rank(bias, 1, "conv2d bias");
  const std::size_t c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t c_out = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != c_in) {
    throw ShapeError("conv2d: input has " + std::to_string(c_in) +
                     " channels but weight " + shape_string(weight.shape()) +
                     " expects " + std::to_string(weight.dim(1)));
  }
  if ((k != 1 && k != 3) || weight.dim(3) != k) {
    throw ShapeError("conv2d: kernel must be 1x1 or 3x3, weight is " +
                     shape_string(weight.shape()));
  }
  if (bias.dim(0) != c_out) {
    throw ShapeError("conv2d: bias " + shape_string(bias.shape()) +
                     " does not match " + std::to_string(c_out) +
                     " output channels");
  }

  const auto& kern = kernels::active();
  const std::size_t plane = h * w;
  const std::size_t depth = c_in * k * k;

  // For 1x1 kernels the input itself is the column matrix.
  auto col = std::make_shared<std::vector<float>>();
  if (k == 3) *col = im2col3(input.data(), c_in, h, w);
  const float* col_ptr = k == 3 ? col->data() : input.data().data();

  Tensor out = Tensor::zeros({c_out, h, w});
  {
    std::span<float> o = out.data();
    std::span<const float> wt = weight.data();
    std::span<const float> b = bias.data();
    for (std::size_t co = 0; co < c_out; ++co) {
      float* row = o.data() + co * plane;
      std::fill(row, row + plane, b[co]);
      kern.accumulate_rows(plane, depth, wt.data() + co * depth, col_ptr, plane,
                           row);
    }
  }

  if (should_record(tape, {&input, &weight, &bias})) {
    out.set_requires_grad(true);
    tape->record(out, [input = input, weight = weight, bias = bias, out, col, c_in, c_out, h, w, k,
                       plane, depth]() mutable {
      const auto& kr = kernels::active();
      std::span<const float> dout = std::as_const(out).grad();
      const float* cols = k == 3 ? col->data() : input.data().data();
      if (weight.requires_grad()) {
        std::span<float> dw = weight.grad();
        for (std::size_t co = 0; co < c_out; ++co) {
          const float* g = dout.data() + co * plane;
          for (std::size_t r = 0; r < depth; ++r) {
            dw[co * depth + r] += float(kr.dot(plane, g, cols + r * plane));
          }
        }
      }
      if (bias.requires_grad()) {
        std::span<float> db = bias.grad();
        for (std::size_t co = 0; co < c_out; ++co) {
          const float* g = dout.data() + co * plane;
          double acc = 0.0;
          for (std::size_t i = 0; i < plane; ++i) acc += g[i];
          db[co] += float(acc);
        }
      }
      if (input.requires_grad()) {
        std::span<const float> wt = weight.data();
        std::vector<float> column(c_out);
        std::vector<float> dcol(k == 3 ? depth * plane : 0);
        std::span<float> din = input.grad();
        for (std::size_t r = 0; r < depth; ++r) {
          for (std::size_t co = 0; co < c_out; ++co) {
            column[co] = wt[co * depth + r];
          }
          float* target = k == 3 ? dcol.data() + r * plane
                                 : din.data() + r * plane;
          kr.accumulate_rows(plane, c_out, column.data(), dout.data(), plane,
                             target);
        }
        if (k == 3) col2im3(dcol, c_in, h, w, din);
      }
    });
  }
  return out;
}

Tensor pixel_shuffle(const Tensor& input, std::size_t upscale, Tape* tape) {
  require_rank(input, 3, "pixel_shuffle input");
  if (upscale == 0) throw ShapeError("pixel_shuffle: upscale factor must be >= 1");
  const std::size_t s2 = upscale * upscale;
  const std::size_t c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (c_in % s2 != 0) {
    throw ShapeError("pixel_shuffle: " + std::to_string(c_in) +
                     " channels not divisible by S^2 = " + std::to_string(s2));
  }
  const std::size_t c = c_in / s2, oh = h * upscale, ow = w * upscale;

  // Source offset of every output element; the gradient is the inverse map.
  auto index = std::make_shared<std::vector<std::size_t>>(c * oh * ow);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const std::size_t src_c =
            ch * s2 + (y % upscale) * upscale + (x % upscale);
        (*index)[(ch * oh + y) * ow + x] =
            (src_c * h + y / upscale) * w + x / upscale;
      }
    }
  }
  Tensor out = Tensor::zeros({c, oh, ow});
  {
    std::span<float> o = out.data();
    std::span<const float> in = input.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = in[(*index)[i]];
  }
  if (should_record(tape, {&input})) {
    out.set_requires_grad(true);
    tape->record(out, [input = input, out, index]() mutable {
      std::span<const float> g = std::as_const(out).grad();
      std::span<float> din = input.grad();
      for (std::size_t i = 0; i < g.size(); ++i) din[(*index)[i]] += g[i];
    });
  }
  return out;
}

Tensor gelu(const Tensor& input, Tape* tape) {
  if (!input.defined()) throw ShapeError("gelu: undefined tensor");
  Tensor out = Tensor::zeros(input.shape());
  kernels::active().gelu(input.numel(), input.data().data(), out.data().data());
  if (should_record(tape, {&input})) {
    out.set_requires_grad(true);
    tape->record(out, [input = input, out]() mutable {
      kernels::active().gelu_backward(input.numel(), input.data().data(),
                                      std::as_const(out).grad().data(),
                                      input.grad().data());
    });
  }
  return out;
}

Tensor sigmoid(const Tensor& input, Tape* tape) {
  if (!input.defined()) throw ShapeError("sigmoid: undefined tensor");
  Tensor out = Tensor::zeros(input.shape());
  kernels::active().sigmoid(input.numel(), input.data().data(),
                            out.data().data());
  if (should_record(tape, {&input})) {
    out.set_requires_grad(true);
    tape->record(out, [input = input, out]() mutable {
      kernels::active().sigmoid_backward(
          out.numel(), std::as_const(out).data().data(),
          std::as_const(out).grad().data(), input.grad().data());
    });
  }
  return out;
}

Tensor lerp_combine(const Tensor& lower, const Tensor& upper, double w_lower,
                    double w_upper, Tape* tape) {
  require_same_shape(lower, upper, "lerp_combine");
  if (std::abs(w_lower + w_upper - 1.0) > 1e-9) {
    throw std::invalid_argument("lerp_combine: weights must sum to 1, got " +
                                std::to_string(w_lower) + " + " +
                                std::to_string(w_upper));
  }
  const float wl = float(w_lower), wu = float(w_upper);
  Tensor out = Tensor::zeros(lower.shape());
  kernels::active().lerp(out.numel(), wl, lower.data().data(), wu,
                         upper.data().data(), out.data().data());
  if (should_record(tape, {&lower, &upper})) {
    out.set_requires_grad(true);
    tape->record(out, [lower = lower, upper = upper, out, wl, wu]() mutable {
      const auto& kr = kernels::active();
      const float* g = std::as_const(out).grad().data();
      if (lower.requires_grad()) kr.axpy(out.numel(), wl, g, lower.grad().data());
      if (upper.requires_grad()) kr.axpy(out.numel(), wu, g, upper.grad().data());
    });
  }
  return out;
}

Tensor hwc_to_chw(const Tensor& input, Tape* tape) {
  require_rank(input, 3, "hwc_to_chw input");
  const std::size_t h = input.dim(0), w = input.dim(1), c = input.dim(2);
  Tensor out = Tensor::zeros({c, h, w});
  {
    std::span<float> o = out.data();
    std::span<const float> in = input.data();
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (std::size_t ch = 0; ch < c; ++ch)
          o[(ch * h + y) * w + x] = in[(y * w + x) * c + ch];
  }
  if (should_record(tape, {&input})) {
    out.set_requires_grad(true);
    tape->record(out, [input = input, out, h, w, c]() mutable {
      std::span<const float> g = std::as_const(out).grad();
      std::span<float> din = input.grad();
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          for (std::size_t ch = 0; ch < c; ++ch)
            din[(y * w + x) * c + ch] += g[(ch * h + y) * w + x];
    });
  }
  return out;
}

Scalar mse_loss(const Tensor& pred, const Tensor& target, Tape* tape) {
  require_same_shape(pred, target, "mse_loss");
  const std::size_t n = pred.numel();
  if (n == 0) throw ShapeError("mse_loss: empty tensors");
  const double value =
      kernels::active().squared_distance(n, pred.data().data(),
                                         target.data().data()) /
      double(n);
  Scalar loss{value, Tensor::filled({1}, float(value))};
  if (should_record(tape, {&pred, &target})) {
    loss.node.set_requires_grad(true);
    tape->record(loss.node, [pred = pred, target = target, node = loss.node, n]() mutable {
      const double g = std::as_const(node).grad()[0];
      const double scale = 2.0 * g / double(n);
      std::span<const float> p = pred.data();
      std::span<const float> t = target.data();
      if (pred.requires_grad()) {
        std::span<float> dp = pred.grad();
        for (std::size_t i = 0; i < n; ++i)
          dp[i] += float(scale * (double(p[i]) - double(t[i])));
      }
      if (target.requires_grad()) {
        std::span<float> dt = target.grad();
        for (std::size_t i = 0; i < n; ++i)
          dt[i] -= float(scale * (double(p[i]) - double(t[i])));
      }
    });
  }
  return loss;
}

Scalar sum(const Tensor& input, Tape* tape) {
  if (!input.defined()) throw ShapeError("sum: undefined tensor");
  std::span<const float> d = input.data();
  const double value = std::accumulate(d.begin(), d.end(), 0.0);
  Scalar result{value, Tensor::filled({1}, float(value))};
  if (should_record(tape, {&input})) {
    result.node.set_requires_grad(true);
    tape->record(result.node, [input = input, node = result.node]() mutable {
      const float g = std::as_const(node).grad()[0];
      for (float& x : input.grad()) x += g;
    });
  }
  return result;
}

}  // namespace treenerv
