// Copyright 2026 The Litmap Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <immintrin.h>

#include "litmap/kernels.hpp"

namespace litmap::kernels::avx2 {
namespace {

// Tail elements land in the lane they would occupy in the scalar reference.
double finish(__m256d acc, const double* tail_a, std::size_t start, std::size_t n) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (std::size_t i = start; i < n; ++i) lanes[i % 4] += tail_a[i - start];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  return finish(acc, a + i, i, n);
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double tail[4];
  for (std::size_t j = i; j < n; ++j) tail[j - i] = a[j] * b[j];
  return finish(acc, tail, i, n);
}

double squared_error(const double* y, const double* p, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(p + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double tail[4];
  for (std::size_t j = i; j < n; ++j) {
    const double d = y[j] - p[j];
    tail[j - i] = d * d;
  }
  return finish(acc, tail, i, n);
}

void residual_hessian(const double* y, const double* p, double* r, double* h, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d pv = _mm256_loadu_pd(p + i);
    _mm256_storeu_pd(r + i, _mm256_sub_pd(_mm256_loadu_pd(y + i), pv));
    _mm256_storeu_pd(h + i, _mm256_mul_pd(pv, _mm256_sub_pd(one, pv)));
  }
  for (; i < n; ++i) {
    r[i] = y[i] - p[i];
    h[i] = p[i] * (1.0 - p[i]);
  }
}

void add_scaled(double* acc, const double* inc, double scale, std::size_t n) {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_mul_pd(s, _mm256_loadu_pd(inc + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), v));
  }
  for (; i < n; ++i) acc[i] += scale * inc[i];
}

void add_gathered(double* acc, const double* table, const std::int32_t* idx, double scale,
                  std::size_t n) {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + i));
    const __m256d g = _mm256_i32gather_pd(table, vi, 8);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(s, g)));
  }
  for (; i < n; ++i) acc[i] += scale * table[idx[i]];
}

void chord_sq(double qx, double qy, double qz, const double* x, const double* y, const double* z,
              double* out, std::size_t n) {
  const __m256d vx = _mm256_set1_pd(qx);
  const __m256d vy = _mm256_set1_pd(qy);
  const __m256d vz = _mm256_set1_pd(qz);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(z + i), vz);
    const __m256d xy = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    _mm256_storeu_pd(out + i, _mm256_add_pd(xy, _mm256_mul_pd(dz, dz)));
  }
  for (; i < n; ++i) {
    const double dx = x[i] - qx;
    const double dy = y[i] - qy;
    const double dz = z[i] - qz;
    out[i] = (dx * dx + dy * dy) + dz * dz;
  }
}

constexpr KernelTable kTable{sum, dot, squared_error, residual_hessian, add_scaled, add_gathered,
                             chord_sq};

}  // namespace

const KernelTable& table() { return kTable; }

}  // namespace litmap::kernels::avx2
