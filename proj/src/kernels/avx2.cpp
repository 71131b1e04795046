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

// Compiled with -mavx2 -mfma. Nothing in this file may run before the
// dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <cmath>

#include "treenerv/kernels/kernels.hpp"
#include "gelu.hpp"

namespace treenerv::kernels {

namespace {

using detail::kGeluCubic;
using detail::kGeluScale;

// Cephes-style single precision exp, relative error ~2 ulp on [-88, 88].
inline __m256 exp256(__m256 x) {
  const __m256 hi = _mm256_set1_ps(88.3762626647949f);
  const __m256 lo = _mm256_set1_ps(-88.3762626647949f);
  // Operand order keeps NaN inputs NaN: min/max return the second operand.
  x = _mm256_min_ps(hi, _mm256_max_ps(lo, x));

  __m256 fx = _mm256_fmadd_ps(x, _mm256_set1_ps(1.44269504088896341f),
                              _mm256_set1_ps(0.5f));
  fx = _mm256_floor_ps(fx);
  x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(0.693359375f), x);
  x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(-2.12194440e-4f), x);

  __m256 y = _mm256_set1_ps(1.9875691500e-4f);
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.3981999507e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(8.3334519073e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(4.1665795894e-2f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.6666665459e-1f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(5.0000001201e-1f));
  const __m256 x2 = _mm256_mul_ps(x, x);
  y = _mm256_fmadd_ps(y, x2, x);
  y = _mm256_add_ps(y, _mm256_set1_ps(1.0f));

  __m256i n = _mm256_cvttps_epi32(fx);
  n = _mm256_add_epi32(n, _mm256_set1_epi32(127));
  n = _mm256_slli_epi32(n, 23);
  return _mm256_mul_ps(y, _mm256_castsi256_ps(n));
}

// exp(-2u) for the logistic form of the GELU.
inline __m256 exp_neg2(__m256 u) {
  const __m256 lim = _mm256_set1_ps(detail::kExpLimit);
  const __m256 x = _mm256_mul_ps(_mm256_set1_ps(-2.0f), u);
  return exp256(_mm256_min_ps(lim, _mm256_max_ps(_mm256_sub_ps(_mm256_setzero_ps(), lim), x)));
}

inline __m256 gelu_inner(__m256 v) {
  const __m256 v3 = _mm256_mul_ps(_mm256_mul_ps(v, v), v);
  return _mm256_mul_ps(_mm256_set1_ps(kGeluScale),
                       _mm256_fmadd_ps(_mm256_set1_ps(kGeluCubic), v3, v));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void accumulate_rows_avx2(std::size_t n, std::size_t rows, const float* a,
                          const float* x, std::size_t x_stride, float* y) {
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256 acc0 = _mm256_loadu_ps(y + i);
    __m256 acc1 = _mm256_loadu_ps(y + i + 8);
    __m256 acc2 = _mm256_loadu_ps(y + i + 16);
    __m256 acc3 = _mm256_loadu_ps(y + i + 24);
    for (std::size_t r = 0; r < rows; ++r) {
      const __m256 c = _mm256_broadcast_ss(a + r);
      const float* row = x + r * x_stride + i;
      acc0 = _mm256_fmadd_ps(c, _mm256_loadu_ps(row), acc0);
      acc1 = _mm256_fmadd_ps(c, _mm256_loadu_ps(row + 8), acc1);
      acc2 = _mm256_fmadd_ps(c, _mm256_loadu_ps(row + 16), acc2);
      acc3 = _mm256_fmadd_ps(c, _mm256_loadu_ps(row + 24), acc3);
    }
    _mm256_storeu_ps(y + i, acc0);
    _mm256_storeu_ps(y + i + 8, acc1);
    _mm256_storeu_ps(y + i + 16, acc2);
    _mm256_storeu_ps(y + i + 24, acc3);
  }
  for (; i + 8 <= n; i += 8) {
    __m256 acc = _mm256_loadu_ps(y + i);
    for (std::size_t r = 0; r < rows; ++r) {
      acc = _mm256_fmadd_ps(_mm256_broadcast_ss(a + r),
                            _mm256_loadu_ps(x + r * x_stride + i), acc);
    }
    _mm256_storeu_ps(y + i, acc);
  }
  for (; i < n; ++i) {
    float acc = y[i];
    for (std::size_t r = 0; r < rows; ++r) acc += a[r] * x[r * x_stride + i];
    y[i] = acc;
  }
}

double dot_avx2(std::size_t n, const float* x, const float* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 xv = _mm256_loadu_ps(x + i);
    const __m256 yv = _mm256_loadu_ps(y + i);
    acc0 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(xv)),
                           _mm256_cvtps_pd(_mm256_castps256_ps128(yv)), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(xv, 1)),
                           _mm256_cvtps_pd(_mm256_extractf128_ps(yv, 1)), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += double(x[i]) * double(y[i]);
  return acc;
}

double squared_distance_avx2(std::size_t n, const float* a, const float* b) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 av = _mm256_loadu_ps(a + i);
    const __m256 bv = _mm256_loadu_ps(b + i);
    const __m256d d0 =
        _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(av)),
                      _mm256_cvtps_pd(_mm256_castps256_ps128(bv)));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(av, 1)),
                      _mm256_cvtps_pd(_mm256_extractf128_ps(bv, 1)));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = double(a[i]) - double(b[i]);
    acc += d * d;
  }
  return acc;
}

void lerp_avx2(std::size_t n, float wl, const float* a, float wu,
               const float* b, float* out) {
  const __m256 l = _mm256_set1_ps(wl);
  const __m256 u = _mm256_set1_ps(wu);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 r = _mm256_fmadd_ps(l, _mm256_loadu_ps(a + i),
                                     _mm256_mul_ps(u, _mm256_loadu_ps(b + i)));
    _mm256_storeu_ps(out + i, r);
  }
  for (; i < n; ++i) out[i] = wl * a[i] + wu * b[i];
}

void axpy_avx2(std::size_t n, float a, const float* x, float* y) {
  const __m256 c = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(c, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void gelu_avx2(std::size_t n, const float* x, float* y) {
  const __m256 one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256 e = exp_neg2(gelu_inner(v));
    _mm256_storeu_ps(y + i, _mm256_div_ps(v, _mm256_add_ps(one, e)));
  }
  for (; i < n; ++i) y[i] = detail::gelu_value(x[i]);
}

void gelu_backward_avx2(std::size_t n, const float* x, const float* dy,
                        float* dx) {
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 two = _mm256_set1_ps(2.0f);
  const __m256 scale = _mm256_set1_ps(kGeluScale);
  const __m256 cubic3 = _mm256_set1_ps(3.0f * kGeluCubic);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256 e = exp_neg2(gelu_inner(v));
    const __m256 s = _mm256_div_ps(one, _mm256_add_ps(one, e));
    const __m256 du =
        _mm256_mul_ps(scale, _mm256_fmadd_ps(cubic3, _mm256_mul_ps(v, v), one));
    // s + 2 v du s (1 - s), with 1 - s = e s
    const __m256 slope = _mm256_mul_ps(_mm256_mul_ps(two, v), du);
    const __m256 d = _mm256_fmadd_ps(slope, _mm256_mul_ps(s, _mm256_mul_ps(e, s)), s);
    _mm256_storeu_ps(dx + i, _mm256_fmadd_ps(d, _mm256_loadu_ps(dy + i),
                                             _mm256_loadu_ps(dx + i)));
  }
  for (; i < n; ++i) dx[i] += detail::gelu_derivative(x[i]) * dy[i];
}

void sigmoid_avx2(std::size_t n, const float* x, float* y) {
  const __m256 one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 e =
        exp256(_mm256_sub_ps(_mm256_setzero_ps(), _mm256_loadu_ps(x + i)));
    _mm256_storeu_ps(y + i, _mm256_div_ps(one, _mm256_add_ps(one, e)));
  }
  for (; i < n; ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
}

void sigmoid_backward_avx2(std::size_t n, const float* y, const float* dy,
                           float* dx) {
  const __m256 one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 yv = _mm256_loadu_ps(y + i);
    const __m256 d = _mm256_mul_ps(yv, _mm256_sub_ps(one, yv));
    _mm256_storeu_ps(dx + i, _mm256_fmadd_ps(d, _mm256_loadu_ps(dy + i),
                                             _mm256_loadu_ps(dx + i)));
  }
  for (; i < n; ++i) dx[i] += y[i] * (1.0f - y[i]) * dy[i];
}

void adam_update_avx2(std::size_t n, const AdamStep& s, const float* grad,
                      float* param, float* m, float* v) {
  const float step_size = s.lr / s.bias_correction1;
  const float inv_sqrt_bc2 = 1.0f / std::sqrt(s.bias_correction2);
  const __m256 b1 = _mm256_set1_ps(s.beta1);
  const __m256 b2 = _mm256_set1_ps(s.beta2);
  const __m256 omb1 = _mm256_set1_ps(1.0f - s.beta1);
  const __m256 omb2 = _mm256_set1_ps(1.0f - s.beta2);
  const __m256 eps = _mm256_set1_ps(s.eps);
  const __m256 step = _mm256_set1_ps(step_size);
  const __m256 ibc2 = _mm256_set1_ps(inv_sqrt_bc2);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 g = _mm256_loadu_ps(grad + i);
    const __m256 mv = _mm256_fmadd_ps(b1, _mm256_loadu_ps(m + i),
                                      _mm256_mul_ps(omb1, g));
    const __m256 vv = _mm256_fmadd_ps(b2, _mm256_loadu_ps(v + i),
                                      _mm256_mul_ps(omb2, _mm256_mul_ps(g, g)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    const __m256 denom = _mm256_fmadd_ps(_mm256_sqrt_ps(vv), ibc2, eps);
    const __m256 p = _mm256_loadu_ps(param + i);
    _mm256_storeu_ps(param + i,
                     _mm256_sub_ps(p, _mm256_div_ps(_mm256_mul_ps(step, mv),
                                                    denom)));
  }
  for (; i < n; ++i) {
    const float gi = grad[i];
    m[i] = s.beta1 * m[i] + (1.0f - s.beta1) * gi;
    v[i] = s.beta2 * v[i] + (1.0f - s.beta2) * gi * gi;
    const float denom = std::sqrt(v[i]) * inv_sqrt_bc2 + s.eps;
    param[i] -= step_size * m[i] / denom;
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{
      .name = "avx2",
      .accumulate_rows = accumulate_rows_avx2,
      .dot = dot_avx2,
      .squared_distance = squared_distance_avx2,
      .lerp = lerp_avx2,
      .axpy = axpy_avx2,
      .gelu = gelu_avx2,
      .gelu_backward = gelu_backward_avx2,
      .sigmoid = sigmoid_avx2,
      .sigmoid_backward = sigmoid_backward_avx2,
      .adam_update = adam_update_avx2,
  };
  return table;
}

}  // namespace treenerv::kernels
