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

#include "tripsynth/tensor.hpp"

#include <string>

#include "tripsynth/error.hpp"

namespace tripsynth {
namespace {

std::size_t checked_numel(const std::vector<std::size_t>& s) {
  if (s.empty() || s.size() > 3) {
    throw ValueError("tensor rank must be 1..3, got rank " +
                     std::to_string(s.size()));
  }
  std::size_t n = 1;
  for (std::size_t d : s) {
    if (d == 0) throw ValueError("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s) {
  const std::size_t n = checked_numel(s);
  shape = std::move(s);
  data.assign(n, 0.0);
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> values) {
  const std::size_t n = checked_numel(s);
  if (n != values.size()) {
    throw ShapeError("tensor literal size " + std::to_string(values.size()) +
                     " does not match shape " + shape_to_string(s));
  }
  shape = std::move(s);
  data = std::move(values);
}

Tensor Tensor::full(std::vector<std::size_t> s, double value) {
  Tensor t(std::move(s));
  for (double& x : t.data) x = value;
  return t;
}

std::size_t Tensor::dim(std::size_t i) const {
  if (i >= shape.size()) {
    throw ShapeError("dimension index " + std::to_string(i) +
                     " out of range for shape " + shape_str());
  }
  return shape[i];
}

std::string Tensor::shape_str() const { return shape_to_string(shape); }

std::string shape_to_string(const std::vector<std::size_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != 0) out += " x ";
    out += std::to_string(s[i]);
  }
  out += "]";
  return out;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shapes disagree: " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}

Tensor gaussian_tensor(SeededRng& rng, std::vector<std::size_t> shape,
                       double mean, double stddev) {
  Tensor t(std::move(shape));
  if (stddev < 0.0) {
    throw ValueError("gaussian_tensor requires a nonnegative stddev");
  }
  if (stddev == 0.0) {
    for (double& x : t.data) x = mean;
    return t;
  }
  for (double& x : t.data) x = rng.gaussian(mean, stddev);
  return t;
}

Tensor uniform_tensor(SeededRng& rng, std::vector<std::size_t> shape,
                      double lo, double hi) {
  Tensor t(std::move(shape));
  for (double& x : t.data) x = rng.uniform(lo, hi);
  return t;
}

}  // namespace tripsynth
