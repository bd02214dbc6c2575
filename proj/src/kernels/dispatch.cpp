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

#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "litmap/kernels.hpp"

namespace litmap::kernels {

#ifndef LITMAP_HAVE_AVX2_TU
namespace avx2 {
const KernelTable& table() { throw std::logic_error("AVX2 kernels not compiled in"); }
}  // namespace avx2
#endif

namespace {

Isa detect() {
  if (std::getenv("LITMAP_FORCE_SCALAR") != nullptr) return Isa::kScalar;
  return isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(LITMAP_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

Isa active_isa() { return static_cast<Isa>(selected().load(std::memory_order_relaxed)); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) throw std::invalid_argument("ISA not available on this CPU");
  selected().store(static_cast<int>(isa), std::memory_order_relaxed);
}

const KernelTable& table_for(Isa isa) {
  return isa == Isa::kAvx2 ? avx2::table() : scalar::table();
}

const KernelTable& active() { return table_for(active_isa()); }

}  // namespace litmap::kernels
