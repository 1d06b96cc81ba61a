// Copyright 2026 The Tripsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstddef>

#include "tripsynth/kernels.hpp"

// Reference backend. These loops define the numerical semantics of every
// kernel; the AVX2 variants must match them bit for bit.

namespace tripsynth::kernels {
namespace {

void add_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void affine_scalar(double* dst, const double* a, double c, double s,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * c + s;
}

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

// Four interleaved partial sums, combined as (s0+s2)+(s1+s3), tail serial.
// This mirrors a 256-bit lane reduction so the AVX2 path can be exact.
double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = s0 + a[i] * b[i];
    s1 = s1 + a[i + 1] * b[i + 1];
    s2 = s2 + a[i + 2] * b[i + 2];
    s3 = s3 + a[i + 3] * b[i + 3];
  }
  double s = (s0 + s2) + (s1 + s3);
  for (; i < n; ++i) s = s + a[i] * b[i];
  return s;
}

double sum_sq_scalar(const double* a, std::size_t n) {
  return dot_scalar(a, a, n);
}

void relu_scalar(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

void relu_grad_scalar(double* dx, const double* x, const double* dy,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) dx[i] = dx[i] + dy[i];
  }
}

void clamp_scalar(double* x, double lo, double hi, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double t = x[i] > lo ? x[i] : lo;
    x[i] = t < hi ? t : hi;
  }
}

void matmul_nn_scalar(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
    }
  }
}

void matmul_tn_scalar(double* c, const double* a, const double* b,
                      std::size_t k, std::size_t m, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[p * m + i];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
    }
  }
}

void matmul_nt_scalar(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] = c[i * n + j] + dot_scalar(a + i * k, b + j * k, k);
    }
  }
}

void rmsprop_scalar(double* w, double* v, const double* g, double rho,
                    double lr, double eps, std::size_t n) {
  const double omr = 1.0 - rho;
  for (std::size_t i = 0; i < n; ++i) {
    const double gg = g[i] * g[i];
    v[i] = rho * v[i] + omr * gg;
    const double denom = std::sqrt(v[i]) + eps;
    w[i] = w[i] - lr * (g[i] / denom);
  }
}

}  // namespace

const KernelTable kScalarTable = {
    add_scalar,    sub_scalar,       mul_scalar,       affine_scalar,
    axpy_scalar,   dot_scalar,       sum_sq_scalar,    relu_scalar,
    relu_grad_scalar, clamp_scalar,  matmul_nn_scalar, matmul_tn_scalar,
    matmul_nt_scalar, rmsprop_scalar,
};

}  // namespace tripsynth::kernels
