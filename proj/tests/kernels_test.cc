/*
 * Copyright 2026 The seqdx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "seqdx/kernels.h"

#include <gtest/gtest.h>

#include <vector>

#include "test_util.h"

namespace seqdx {
namespace {

using testing::random_vector;

#define SIMD_OR_SKIP(var)                                                  \
  const kernels::KernelTable* var = kernels::avx2_table();                 \
  if (var == nullptr) GTEST_SKIP() << "AVX2/FMA not available on this machine"

// Sizes straddle the 4- and 8-wide vector bodies and their scalar tails.
const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 32, 33, 64, 100, 257};

TEST(Kernels, ActiveTableIsOneOfTheKnownOnes) {
  const auto& a = kernels::active();
  EXPECT_TRUE(&a == &kernels::scalar_table() || &a == kernels::avx2_table());
}

TEST(Kernels, ScalarDotMatchesDirectSum) {
  Rng rng(1);
  for (std::size_t n : kSizes) {
    const auto a = random_vector(n, rng), b = random_vector(n, rng);
    double want = 0.0;
    for (std::size_t i = 0; i < n; ++i) want += a[i] * b[i];
    EXPECT_DOUBLE_EQ(kernels::scalar_table().dot(a.data(), b.data(), n), want);
  }
}

TEST(Kernels, Avx2DotAndAxpyMatchScalar) {
  SIMD_OR_SKIP(simd);
  const auto& ref = kernels::scalar_table();
  Rng rng(2);
  for (std::size_t n : kSizes) {
    const auto a = random_vector(n, rng), b = random_vector(n, rng);
    EXPECT_NEAR(simd->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), 1e-12) << n;
    auto y1 = random_vector(n, rng);
    auto y2 = y1;
    simd->axpy(0.37, a.data(), y1.data(), n);
    ref.axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-14);
  }
}

TEST(Kernels, Avx2MatrixKernelsMatchScalar) {
  SIMD_OR_SKIP(simd);
  const auto& ref = kernels::scalar_table();
  Rng rng(3);
  for (std::size_t rows : {1, 2, 5, 9}) {
    for (std::size_t cols : {1, 3, 4, 8, 13, 64}) {
      const auto w = random_vector(rows * cols, rng), x = random_vector(cols, rng), bias = random_vector(rows, rng);
      std::vector<double> y1(rows), y2(rows);
      simd->gemv(w.data(), rows, cols, x.data(), bias.data(), y1.data());
      ref.gemv(w.data(), rows, cols, x.data(), bias.data(), y2.data());
      for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-12);
      simd->gemv(w.data(), rows, cols, x.data(), nullptr, y1.data());
      ref.gemv(w.data(), rows, cols, x.data(), nullptr, y2.data());
      for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-12);

      const auto v = random_vector(rows, rng);
      auto o1 = random_vector(cols, rng);
      auto o2 = o1;
      simd->gemv_t_acc(w.data(), rows, cols, v.data(), o1.data());
      ref.gemv_t_acc(w.data(), rows, cols, v.data(), o2.data());
      for (std::size_t j = 0; j < cols; ++j) EXPECT_NEAR(o1[j], o2[j], 1e-12);

      auto w1 = w, w2 = w;
      simd->ger(-0.5, v.data(), rows, x.data(), cols, w1.data());
      ref.ger(-0.5, v.data(), rows, x.data(), cols, w2.data());
      for (std::size_t k = 0; k < w.size(); ++k) EXPECT_NEAR(w1[k], w2[k], 1e-14);
    }
  }
}

TEST(Kernels, Avx2ComplexKernelsMatchScalar) {
  SIMD_OR_SKIP(simd);
  const auto& ref = kernels::scalar_table();
  Rng rng(4);
  for (std::size_t n : kSizes) {
    std::vector<cplx> x(n), y1(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      y1[i] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    }
    auto y2 = y1;
    const cplx a(0.3, -1.7);
    simd->caxpy(a, x.data(), y1.data(), n);
    ref.caxpy(a, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(y1[i] - y2[i]), 1e-14);

    std::vector<double> m1(n), m2(n);
    simd->cabs(x.data(), m1.data(), n);
    ref.cabs(x.data(), m2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(m1[i], m2[i], 1e-15);
  }
}

TEST(Kernels, ScalarCabsIsModulus) {
  const std::vector<cplx> x{{3, 4}, {0, 0}, {-1, 0}, {0, -2}};
  std::vector<double> out(x.size());
  kernels::scalar_table().cabs(x.data(), out.data(), x.size());
  EXPECT_EQ(out, (std::vector<double>{5, 0, 1, 2}));
}

}  // namespace
}  // namespace seqdx
