// Copyright 2026 The Perspex Authors.
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

#include "perspex/tc/matrix.hpp"

#include <algorithm>
#include <vector>

#include "perspex/error.hpp"

namespace perspex::tc {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ArgumentError("matrix value count does not match shape");
  }
}

void Matrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

namespace {

// c[m x n] += a[m x k] * b[k x n] on raw row-major storage. Four rows of c
// share each pass over a row of b.
void kernel(const double* pa, const double* pb, double* pc, std::size_t m, std::size_t k, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    double* __restrict c0 = pc + i * n;
    double* __restrict c1 = c0 + n;
    double* __restrict c2 = c1 + n;
    double* __restrict c3 = c2 + n;
    const double* a0 = pa + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double v0 = a0[p], v1 = a0[k + p], v2 = a0[2 * k + p], v3 = a0[3 * k + p];
      if (v0 == 0.0 && v1 == 0.0 && v2 == 0.0 && v3 == 0.0) continue;
      const double* __restrict brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double bv = brow[j];
        c0[j] += v0 * bv;
        c1[j] += v1 * bv;
        c2[j] += v2 * bv;
        c3[j] += v3 * bv;
      }
    }
  }
  for (; i < m; ++i) {
    double* __restrict crow = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* __restrict brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

std::vector<double> transposed(const Matrix& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> t(r * c);
  const double* pa = a.values().data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) t[j * r + i] = pa[i * c + j];
  }
  return t;
}

}  // namespace

void gemm_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  kernel(a.values().data(), b.values().data(), c.values().data(), a.rows(), a.cols(), b.cols());
}

void gemm_nt_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  const auto bt = transposed(b);
  kernel(a.values().data(), bt.data(), c.values().data(), a.rows(), a.cols(), b.rows());
}

void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  const auto at = transposed(a);
  kernel(at.data(), b.values().data(), c.values().data(), a.cols(), a.rows(), b.cols());
}

}  // namespace perspex::tc
