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

#ifndef SEQDX_KERNELS_H_
#define SEQDX_KERNELS_H_

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

// Dense arithmetic kernels behind every inner loop of the library (MLP
// forward/backward, zero-filled reconstruction updates). Each kernel has a
// scalar reference implementation and, on x86-64, an AVX2/FMA variant. The
// variant is picked once at startup from CPUID; set SEQDX_SIMD=scalar to force
// the reference path (e.g. for cross-machine bit reproducibility).

namespace seqdx::kernels {

using cplx = std::complex<double>;

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + bias, W is rows x cols row-major. bias may be null.
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols,
               const double* x, const double* bias, double* y);
  // out += W^T v, W is rows x cols row-major, v has rows entries.
  void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols,
                     const double* v, double* out);
  // W += alpha * u v^T
  void (*ger)(double alpha, const double* u, std::size_t rows, const double* v,
              std::size_t cols, double* w);
  // y[i] += a * x[i] over complex values.
  void (*caxpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
  // out[i] = sqrt(re^2 + im^2)
  void (*cabs)(const cplx* x, double* out, std::size_t n);
};

const KernelTable& scalar_table();

// Null when the binary or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

// The table used by the library. Resolved on first call.
const KernelTable& active();

// Convenience wrappers over active().
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace seqdx::kernels

#endif  // SEQDX_KERNELS_H_
