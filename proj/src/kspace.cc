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

#include "seqdx/kspace.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "seqdx/kernels.h"
#include "seqdx/random.h"

namespace seqdx {

template <typename T>
Matrix<T>::Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("matrix data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

template class Matrix<cplx>;
template class Matrix<double>;

void validate(const ComplexMatrix& m) {
  if (m.empty()) throw std::invalid_argument("empty matrix");
  for (const cplx& v : m.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("matrix holds a non-finite value");
    }
  }
}

CartesianMask::CartesianMask(std::vector<std::uint8_t> selected) : selected_(std::move(selected)) {
  for (std::uint8_t b : selected_) {
    if (b > 1) throw std::invalid_argument("mask bits must be 0 or 1");
    count_ += b;
  }
}

CartesianMask CartesianMask::full(std::size_t cols) {
  return CartesianMask(std::vector<std::uint8_t>(cols, 1));
}

void CartesianMask::select(std::size_t line) {
  if (line >= selected_.size()) {
    throw std::out_of_range("line " + std::to_string(line) + " outside [0, " +
                            std::to_string(selected_.size()) + ")");
  }
  if (selected_[line]) {
    throw std::logic_error("line " + std::to_string(line) + " is already sampled");
  }
  selected_[line] = 1;
  ++count_;
}

std::vector<std::size_t> CartesianMask::selected_lines() const {
  std::vector<std::size_t> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < selected_.size(); ++i) {
    if (selected_[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> CartesianMask::unsampled_lines() const {
  std::vector<std::size_t> out;
  out.reserve(selected_.size() - count_);
  for (std::size_t i = 0; i < selected_.size(); ++i) {
    if (!selected_[i]) out.push_back(i);
  }
  return out;
}

CartesianMask CartesianMask::intersect(const CartesianMask& other) const {
  if (other.cols() != cols()) throw std::invalid_argument("mask width mismatch");
  std::vector<std::uint8_t> bits(cols());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = selected_[i] & other.selected_[i];
  return CartesianMask(std::move(bits));
}

namespace {

// n x n DFT matrix with exponent sign `sign`, scaled by 1/sqrt(n). The angle
// is reduced modulo n before evaluating so large index products stay exact.
std::vector<cplx> dft_matrix(std::size_t n, double sign) {
  std::vector<cplx> m(n * n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((j * k) % n) /
                           static_cast<double>(n);
      m[j * n + k] = std::polar(scale, angle);
    }
  }
  return m;
}

// out = F_rows * in * F_cols (F symmetric), done as two passes of 1D transforms.
ComplexMatrix separable_transform(const ComplexMatrix& in, double sign) {
  validate(in);
  const std::size_t rows = in.rows(), cols = in.cols();
  const std::vector<cplx> fr = dft_matrix(rows, sign);
  const std::vector<cplx> fc = dft_matrix(cols, sign);
  const auto& k = kernels::active();

  // Along columns index: tmp(r, :) = sum_c in(r, c) * fc(c, :)
  ComplexMatrix tmp(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      k.caxpy(in(r, c), fc.data() + c * cols, tmp.row(r).data(), cols);
    }
  }
  // Along rows index: out(u, :) = sum_r fr(u, r) * tmp(r, :)
  ComplexMatrix out(rows, cols);
  for (std::size_t u = 0; u < rows; ++u) {
    for (std::size_t r = 0; r < rows; ++r) {
      k.caxpy(fr[u * rows + r], tmp.row(r).data(), out.row(u).data(), cols);
    }
  }
  return out;
}

}  // namespace

ComplexMatrix dft2(const ComplexMatrix& image) { return separable_transform(image, -1.0); }

ComplexMatrix idft2(const ComplexMatrix& kspace) { return separable_transform(kspace, +1.0); }

UndersampledKSpace apply_mask(const ComplexMatrix& kspace, const CartesianMask& mask) {
  if (mask.cols() != kspace.cols()) {
    throw std::invalid_argument("mask has " + std::to_string(mask.cols()) +
                                " columns, k-space has " + std::to_string(kspace.cols()));
  }
  ComplexMatrix out(kspace.rows(), kspace.cols());
  for (std::size_t r = 0; r < kspace.rows(); ++r) {
    for (std::size_t c = 0; c < kspace.cols(); ++c) {
      if (mask.is_selected(c)) out(r, c) = kspace(r, c);
    }
  }
  return {std::move(out), mask};
}

UndersampledKSpace add_line(const UndersampledKSpace& state, const ComplexMatrix& full_kspace,
                            std::size_t index) {
  if (full_kspace.rows() != state.kspace.rows() || full_kspace.cols() != state.kspace.cols()) {
    throw std::invalid_argument("full k-space shape differs from the undersampled state");
  }
  UndersampledKSpace next = state;
  next.mask.select(index);
  for (std::size_t r = 0; r < full_kspace.rows(); ++r) next.kspace(r, index) = full_kspace(r, index);
  return next;
}

RealMatrix zero_fill_magnitude(const UndersampledKSpace& state) {
  const ComplexMatrix image = idft2(state.kspace);
  RealMatrix out(image.rows(), image.cols());
  kernels::active().cabs(image.values().data(), out.values().data(), image.size());
  return out;
}

CartesianMask init_random_mask(std::size_t cols, std::size_t n_random, double center_fraction,
                               std::uint64_t seed) {
  if (cols == 0) throw std::invalid_argument("mask needs at least one column");
  if (!(center_fraction >= 0.0 && center_fraction <= 1.0)) {
    throw std::invalid_argument("center_fraction must lie in [0, 1]");
  }
  const auto n_center = static_cast<std::size_t>(std::floor(center_fraction * static_cast<double>(cols)));
  if (n_random + n_center > cols) {
    throw std::invalid_argument("cannot place " + std::to_string(n_center) + " centre and " +
                                std::to_string(n_random) + " random lines in " +
                                std::to_string(cols) + " columns");
  }
  CartesianMask mask(cols);
  const std::size_t start = cols / 2 - n_center / 2;
  for (std::size_t i = 0; i < n_center; ++i) mask.select(start + i);

  // Partial Fisher-Yates over the remaining lines.
  std::vector<std::size_t> pool = mask.unsampled_lines();
  Rng rng(seed);
  for (std::size_t i = 0; i < n_random; ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
    mask.select(pool[i]);
  }
  return mask;
}

ZeroFilledRecon::ZeroFilledRecon(const ComplexMatrix& full_kspace)
    : rows_(full_kspace.rows()), cols_(full_kspace.cols()) {
  validate(full_kspace);
  const std::vector<cplx> fr = dft_matrix(rows_, +1.0);
  basis_ = dft_matrix(cols_, +1.0);
  row_idft_.assign(rows_ * cols_, cplx{});
  for (std::size_t c = 0; c < cols_; ++c) {
    for (std::size_t u = 0; u < rows_; ++u) {
      cplx acc{};
      for (std::size_t r = 0; r < rows_; ++r) acc += fr[u * rows_ + r] * full_kspace(r, c);
      row_idft_[c * rows_ + u] = acc;
    }
  }
}

ComplexMatrix ZeroFilledRecon::image_for(const CartesianMask& mask) const {
  if (mask.cols() != cols_) throw std::invalid_argument("mask width mismatch");
  ComplexMatrix image(rows_, cols_);
  for (std::size_t line : mask.selected_lines()) add_column(image, line);
  return image;
}

void ZeroFilledRecon::add_column(ComplexMatrix& image, std::size_t line) const {
  const auto& k = kernels::active();
  const cplx* column = row_idft_.data() + line * rows_;
  const cplx* basis = basis_.data() + line * cols_;
  for (std::size_t u = 0; u < rows_; ++u) k.caxpy(column[u], basis, image.row(u).data(), cols_);
}

void ZeroFilledRecon::magnitude(const ComplexMatrix& image, RealMatrix& out) {
  if (out.rows() != image.rows() || out.cols() != image.cols()) {
    out = RealMatrix(image.rows(), image.cols());
  }
  kernels::active().cabs(image.values().data(), out.values().data(), image.size());
}

}  // namespace seqdx
