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

#ifndef SEQDX_KSPACE_H_
#define SEQDX_KSPACE_H_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace seqdx {

using cplx = std::complex<double>;

// Dense row-major matrix. Shape is fixed at construction.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using ComplexMatrix = Matrix<cplx>;
using RealMatrix = Matrix<double>;

// Throws std::invalid_argument when the matrix is empty or holds NaN/Inf.
void validate(const ComplexMatrix& m);

// Column selector; a selected column is a fully acquired phase-encode line.
class CartesianMask {
 public:
  CartesianMask() = default;
  explicit CartesianMask(std::size_t cols) : selected_(cols, 0) {}
  explicit CartesianMask(std::vector<std::uint8_t> selected);

  static CartesianMask full(std::size_t cols);

  std::size_t cols() const { return selected_.size(); }
  std::size_t line_count() const { return count_; }
  std::size_t unsampled_count() const { return selected_.size() - count_; }
  bool is_selected(std::size_t line) const { return selected_.at(line) != 0; }
  bool is_full() const { return count_ == selected_.size(); }
  std::span<const std::uint8_t> bits() const { return selected_; }

  // Throws std::out_of_range / std::logic_error when out of range or already set.
  void select(std::size_t line);

  std::vector<std::size_t> selected_lines() const;
  std::vector<std::size_t> unsampled_lines() const;

  CartesianMask intersect(const CartesianMask& other) const;

  bool operator==(const CartesianMask&) const = default;

 private:
  std::vector<std::uint8_t> selected_;
  std::size_t count_ = 0;
};

// Masked k-space: columns whose mask bit is 0 are exactly zero.
struct UndersampledKSpace {
  ComplexMatrix kspace;
  CartesianMask mask;
};

// Orthonormal 2D DFT (1/sqrt(rows*cols) overall), DC at (0, 0).
ComplexMatrix dft2(const ComplexMatrix& image);
ComplexMatrix idft2(const ComplexMatrix& kspace);

UndersampledKSpace apply_mask(const ComplexMatrix& kspace, const CartesianMask& mask);

// Acquires one more column. Adding an already-sampled line is a logic error:
// a correctly masked policy can never request one.
UndersampledKSpace add_line(const UndersampledKSpace& state, const ComplexMatrix& full_kspace,
                            std::size_t index);

// |idft2(state.kspace)| elementwise.
RealMatrix zero_fill_magnitude(const UndersampledKSpace& state);

// floor(center_fraction * cols) contiguous lines centred on cols/2, plus
// n_random distinct lines drawn uniformly from the rest.
CartesianMask init_random_mask(std::size_t cols, std::size_t n_random, double center_fraction,
                               std::uint64_t seed);

// Incremental zero-filled reconstruction. Because lines are whole columns,
// the image is a sum of rank-one terms (row-IDFT of column j) x (column-IDFT
// basis j), so acquiring a line costs O(rows * cols) instead of a full 2D
// transform. Agrees with idft2(apply_mask(x, mask)) to rounding.
class ZeroFilledRecon {
 public:
  explicit ZeroFilledRecon(const ComplexMatrix& full_kspace);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  // Complex image for `mask`, built from scratch.
  ComplexMatrix image_for(const CartesianMask& mask) const;
  // image += contribution of column `line`.
  void add_column(ComplexMatrix& image, std::size_t line) const;
  // Writes |image| into `out` (resized as needed).
  static void magnitude(const ComplexMatrix& image, RealMatrix& out);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<cplx> row_idft_;  // column-major: cols_ blocks of rows_ values
  std::vector<cplx> basis_;     // cols_ x cols_, row j = exp(2 pi i j c / cols) / sqrt(cols)
};

}  // namespace seqdx

#endif  // SEQDX_KSPACE_H_
