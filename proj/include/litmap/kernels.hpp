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

#pragma once
// Data-parallel inner loops shared by the learner and the geographic interpolator.
//
// Every kernel has a scalar reference implementation and an AVX2 variant. The
// variants are bit-identical: reductions use four interleaved accumulators
// combined as (l0 + l1) + (l2 + l3) in both paths, and the build disables
// floating-point contraction so no FMA is introduced behind our back.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace litmap::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  double (*sum)(const double* a, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_error)(const double* y, const double* p, std::size_t n);
  void (*residual_hessian)(const double* y, const double* p, double* r, double* h, std::size_t n);
  void (*add_scaled)(double* acc, const double* inc, double scale, std::size_t n);
  void (*add_gathered)(double* acc, const double* table, const std::int32_t* idx, double scale,
                       std::size_t n);
  void (*chord_sq)(double qx, double qy, double qz, const double* x, const double* y,
                   const double* z, double* out, std::size_t n);
};

namespace scalar {
const KernelTable& table();
}
namespace avx2 {
// Only valid when isa_available(Isa::kAvx2).
const KernelTable& table();
}

bool isa_available(Isa isa);
std::string_view isa_name(Isa isa);

/// The ISA picked at first use: AVX2 when the CPU has it, unless the
/// LITMAP_FORCE_SCALAR environment variable is set.
Isa active_isa();
/// Overrides the runtime choice. Throws std::invalid_argument if unavailable.
void force_isa(Isa isa);
const KernelTable& table_for(Isa isa);
const KernelTable& active();

inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}
inline double squared_error(std::span<const double> y, std::span<const double> p) {
  return active().squared_error(y.data(), p.data(), y.size() < p.size() ? y.size() : p.size());
}

}  // namespace litmap::kernels
