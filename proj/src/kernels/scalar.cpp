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

#include "litmap/kernels.hpp"

namespace litmap::kernels::scalar {
namespace {

constexpr std::size_t kLanes = 4;

double combine(const double* lanes) { return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]); }

double sum(const double* a, std::size_t n) {
  double lanes[kLanes] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lanes[i % kLanes] += a[i];
  return combine(lanes);
}

double dot(const double* a, const double* b, std::size_t n) {
  double lanes[kLanes] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lanes[i % kLanes] += a[i] * b[i];
  return combine(lanes);
}

double squared_error(const double* y, const double* p, std::size_t n) {
  double lanes[kLanes] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - p[i];
    lanes[i % kLanes] += d * d;
  }
  return combine(lanes);
}

void residual_hessian(const double* y, const double* p, double* r, double* h, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = y[i] - p[i];
    h[i] = p[i] * (1.0 - p[i]);
  }
}

void add_scaled(double* acc, const double* inc, double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += scale * inc[i];
}

void add_gathered(double* acc, const double* table, const std::int32_t* idx, double scale,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += scale * table[idx[i]];
}

void chord_sq(double qx, double qy, double qz, const double* x, const double* y, const double* z,
              double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
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

}  // namespace litmap::kernels::scalar
