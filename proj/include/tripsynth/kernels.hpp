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

#ifndef TRIPSYNTH_KERNELS_HPP_
#define TRIPSYNTH_KERNELS_HPP_

#include <cstddef>

// Low level f64 kernels behind the tensor engine. Two backends exist: a
// scalar reference and an AVX2 variant, selected at runtime. Both backends
// are required to produce bit-identical results, which constrains how they
// may be written:
//
//  * no fused multiply-add anywhere (a*b+c is two roundings in both paths);
//  * reductions (dot, sum_sq, matmul_nt) use four interleaved partial sums
//    s_j = sum over i of x[4i+j]*y[4i+j], combined as (s0+s2)+(s1+s3), with
//    the remaining tail elements added serially in index order;
//  * matmul_nn / matmul_tn accumulate each output element serially over k,
//    one multiply and one add per term.
//
// The scalar backend is the reference definition of these semantics; the
// equivalence suite asserts exact equality against it.
namespace tripsynth::kernels {

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  // dst[i] = a[i] (+|-|*) b[i]
  void (*add)(double* dst, const double* a, const double* b, std::size_t n);
  void (*sub)(double* dst, const double* a, const double* b, std::size_t n);
  void (*mul)(double* dst, const double* a, const double* b, std::size_t n);
  // dst[i] = a[i] * c + s
  void (*affine)(double* dst, const double* a, double c, double s,
                 std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double* y, double a, const double* x, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_sq)(const double* a, std::size_t n);
  // dst[i] = src[i] > 0 ? src[i] : 0
  void (*relu)(double* dst, const double* src, std::size_t n);
  // dx[i] += x[i] > 0 ? dy[i] : 0
  void (*relu_grad)(double* dx, const double* x, const double* dy,
                    std::size_t n);
  // x[i] = min(max(x[i], lo), hi)
  void (*clamp)(double* x, double lo, double hi, std::size_t n);
  // C[m,n] += A[m,k] * B[k,n]
  void (*matmul_nn)(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n);
  // C[m,n] += A^T * B with A[k,m], B[k,n]
  void (*matmul_tn)(double* c, const double* a, const double* b, std::size_t k,
                    std::size_t m, std::size_t n);
  // C[m,n] += A * B^T with A[m,k], B[n,k]
  void (*matmul_nt)(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n);
  // v[i] = rho*v[i] + (1-rho)*g[i]^2; w[i] -= lr * g[i] / (sqrt(v[i]) + eps)
  void (*rmsprop)(double* w, double* v, const double* g, double rho, double lr,
                  double eps, std::size_t n);
};

// Reference implementation; always available.
extern const KernelTable kScalarTable;

// True when this build carries AVX2 kernels and the host CPU supports them.
bool avx2_available();

// Active table. First use resolves the backend from the TRIPSYNTH_KERNELS
// environment variable ("scalar", "avx2", or "auto"; default auto picks AVX2
// when available), after which the choice is stable.
const KernelTable& table();

Backend active_backend();

// Testing hook. Throws ValueError if the requested backend is unavailable.
void set_backend(Backend b);

}  // namespace tripsynth::kernels

#endif  // TRIPSYNTH_KERNELS_HPP_
