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

#ifndef TRIPSYNTH_TENSOR_HPP_
#define TRIPSYNTH_TENSOR_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "tripsynth/rng.hpp"

namespace tripsynth {

// Dense row-major f64 tensor, ranks 1..3. Plain value type: copy copies data.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);
  Tensor(std::vector<std::size_t> s, std::vector<double> values);

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<std::size_t> s, double value);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const;

  double& operator()(std::size_t i) { return data[i]; }
  double operator()(std::size_t i) const { return data[i]; }
  double& operator()(std::size_t i, std::size_t j) {
    return data[i * shape[1] + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data[i * shape[1] + j];
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  std::string shape_str() const;
};

// "[2 x 3]" style rendering used in error messages.
std::string shape_to_string(const std::vector<std::size_t>& s);

// Throws ShapeError naming both shapes.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

// Element draws in row-major order; stddev 0 yields a constant tensor
// without consuming draws.
Tensor gaussian_tensor(SeededRng& rng, std::vector<std::size_t> shape,
                       double mean, double stddev);
Tensor uniform_tensor(SeededRng& rng, std::vector<std::size_t> shape,
                      double lo, double hi);

}  // namespace tripsynth

#endif  // TRIPSYNTH_TENSOR_HPP_
