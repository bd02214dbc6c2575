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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <random>
#include <vector>

#include "litmap/kernels.hpp"

using namespace litmap::kernels;

namespace {

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels against naive loops") {
  const auto& t = scalar::table();
  std::vector<double> a{1, 2, 3, 4, 5, 6, 7};
  std::vector<double> b{1, 1, 1, 1, 1, 1, 2};
  CHECK(t.sum(a.data(), a.size()) == 28.0);
  CHECK(t.dot(a.data(), b.data(), a.size()) == 35.0);
  CHECK(t.squared_error(a.data(), b.data(), a.size()) == doctest::Approx(0 + 1 + 4 + 9 + 16 + 25 + 25));
  CHECK(t.sum(a.data(), 0) == 0.0);
}

TEST_CASE("avx2 variants are bit-identical to the scalar reference") {
  if (!isa_available(Isa::kAvx2)) {
    MESSAGE("AVX2 not available on this CPU; only the scalar path is exercised");
    return;
  }
  const auto& s = scalar::table();
  const auto& v = avx2::table();
  std::mt19937_64 rng(7);
  for (std::size_t n = 0; n < 300; n += (n < 40 ? 1 : 37)) {
    for (int rep = 0; rep < 3; ++rep) {
      auto a = random_vec(rng, n, -1e3, 1e3);
      auto b = random_vec(rng, n, -1.0, 1.0);
      auto y = random_vec(rng, n, 0.0, 1.0);
      for (auto& x : y) x = x < 0.3 ? 1.0 : 0.0;
      auto p = random_vec(rng, n, 1e-6, 1.0 - 1e-6);

      CHECK(same_bits(s.sum(a.data(), n), v.sum(a.data(), n)));
      CHECK(same_bits(s.dot(a.data(), b.data(), n), v.dot(a.data(), b.data(), n)));
      CHECK(same_bits(s.squared_error(y.data(), p.data(), n), v.squared_error(y.data(), p.data(), n)));

      std::vector<double> r1(n), h1(n), r2(n), h2(n);
      s.residual_hessian(y.data(), p.data(), r1.data(), h1.data(), n);
      v.residual_hessian(y.data(), p.data(), r2.data(), h2.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(same_bits(r1[i], r2[i]));
        REQUIRE(same_bits(h1[i], h2[i]));
      }

      auto acc1 = a, acc2 = a;
      s.add_scaled(acc1.data(), b.data(), 0.37, n);
      v.add_scaled(acc2.data(), b.data(), 0.37, n);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(same_bits(acc1[i], acc2[i]));

      auto table = random_vec(rng, 17, -2.0, 2.0);
      std::vector<std::int32_t> idx(n);
      std::uniform_int_distribution<int> pick(0, 16);
      for (auto& k : idx) k = pick(rng);
      acc1 = a;
      acc2 = a;
      s.add_gathered(acc1.data(), table.data(), idx.data(), 0.1, n);
      v.add_gathered(acc2.data(), table.data(), idx.data(), 0.1, n);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(same_bits(acc1[i], acc2[i]));

      auto x = random_vec(rng, n, -1, 1), yy = random_vec(rng, n, -1, 1), z = random_vec(rng, n, -1, 1);
      std::vector<double> o1(n), o2(n);
      s.chord_sq(0.3, -0.2, 0.9, x.data(), yy.data(), z.data(), o1.data(), n);
      v.chord_sq(0.3, -0.2, 0.9, x.data(), yy.data(), z.data(), o2.data(), n);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(same_bits(o1[i], o2[i]));
    }
  }
}

TEST_CASE("forcing the scalar path is honoured") {
  const Isa before = active_isa();
  force_isa(Isa::kScalar);
  CHECK(active_isa() == Isa::kScalar);
  CHECK(&active() == &scalar::table());
  force_isa(before);
  CHECK(isa_name(Isa::kScalar) == "scalar");
}
