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
#include <functional>
#include <vector>

#include "doctest.h"
#include "tripsynth/autodiff.hpp"
#include "tripsynth/error.hpp"
#include "tripsynth/rng.hpp"
#include "tripsynth/tensor.hpp"

using tripsynth::SeededRng;
using tripsynth::ShapeError;
using tripsynth::TapeError;
using tripsynth::Tensor;
namespace ad = tripsynth::autodiff;

namespace {

// A model maps registered parameter nodes to a scalar loss on a fresh tape.
using Model = std::function<ad::NodeId(ad::Tape&, const std::vector<ad::NodeId>&)>;

double eval_loss(const Model& model, const std::vector<Tensor>& params) {
  ad::Tape tape;
  std::vector<ad::NodeId> nodes;
  for (std::size_t i = 0; i < params.size(); ++i) {
    nodes.push_back(tape.param(i, params[i]));
  }
  return tape.value(model(tape, nodes))(0);
}

// Central differences against the tape's reverse sweep. The oracle never
// touches backward(): it only re-evaluates the forward pass.
void check_gradients(const Model& model, std::vector<Tensor> params,
                     double step = 1e-5, double tol = 1e-4) {
  ad::Tape tape;
  std::vector<ad::NodeId> nodes;
  for (std::size_t i = 0; i < params.size(); ++i) {
    nodes.push_back(tape.param(i, params[i]));
  }
  const std::vector<Tensor> grads = tape.backward(model(tape, nodes));
  REQUIRE(grads.size() == params.size());

  for (std::size_t t = 0; t < params.size(); ++t) {
    REQUIRE(grads[t].shape == params[t].shape);
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      std::vector<Tensor> bumped = params;
      bumped[t].data[i] += step;
      const double up = eval_loss(model, bumped);
      bumped[t].data[i] -= 2.0 * step;
      const double dn = eval_loss(model, bumped);
      const double numeric = (up - dn) / (2.0 * step);
      const double analytic = grads[t].data[i];
      const double denom =
          std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      CHECK(std::abs(numeric - analytic) / denom < tol);
    }
  }
}

}  // namespace

TEST_CASE("gradients: dense relu chain") {
  SeededRng rng(11);
  for (int instance = 0; instance < 3; ++instance) {
    SeededRng sub = rng.derive(1, static_cast<std::uint64_t>(instance));
    const Tensor x = tripsynth::uniform_tensor(sub, {3, 4}, -1.0, 1.0);
    std::vector<Tensor> params = {
        tripsynth::uniform_tensor(sub, {4, 5}, -0.8, 0.8),
        tripsynth::uniform_tensor(sub, {5}, -0.5, 0.5),
        tripsynth::uniform_tensor(sub, {5, 2}, -0.8, 0.8)};
    check_gradients(
        [&x](ad::Tape& t, const std::vector<ad::NodeId>& p) {
          const ad::NodeId h =
              t.relu(t.add_rowvec(t.matmul(t.input(x), p[0]), p[1]));
          return t.mean_all(t.matmul(h, p[2]));
        },
        params);
  }
}

TEST_CASE("gradients: pointwise nonlinearities") {
  SeededRng rng(12);
  for (int instance = 0; instance < 3; ++instance) {
    SeededRng sub = rng.derive(1, static_cast<std::uint64_t>(instance));
    std::vector<Tensor> params = {
        tripsynth::uniform_tensor(sub, {2, 6}, -1.5, 1.5)};
    check_gradients(
        [](ad::Tape& t, const std::vector<ad::NodeId>& p) {
          const ad::NodeId a = t.sigmoid(p[0]);
          const ad::NodeId b = t.tanh(p[0]);
          const ad::NodeId c = t.softplus(t.mul(a, b));
          return t.sum_all(t.affine(c, 2.0, -0.25));
        },
        params);
  }
}

TEST_CASE("gradients: softmax rows against a fixed mask") {
  SeededRng rng(13);
  for (int instance = 0; instance < 3; ++instance) {
    SeededRng sub = rng.derive(1, static_cast<std::uint64_t>(instance));
    const Tensor mask = tripsynth::uniform_tensor(sub, {3, 4}, 0.0, 1.0);
    std::vector<Tensor> params = {
        tripsynth::uniform_tensor(sub, {3, 4}, -2.0, 2.0)};
    check_gradients(
        [&mask](ad::Tape& t, const std::vector<ad::NodeId>& p) {
          // The mask weights off-diagonal terms of the softmax Jacobian.
          return t.sum_all(t.mul(t.softmax(p[0]), t.input(mask)));
        },
        params);
  }
}

TEST_CASE("gradients: concat, sub, and time stack/slice round trip") {
  SeededRng rng(14);
  const Tensor x = tripsynth::uniform_tensor(rng, {2, 3}, -1.0, 1.0);
  std::vector<Tensor> params = {tripsynth::uniform_tensor(rng, {2, 3}, -1, 1),
                                tripsynth::uniform_tensor(rng, {2, 2}, -1, 1)};
  check_gradients(
      [&x](ad::Tape& t, const std::vector<ad::NodeId>& p) {
        const ad::NodeId wide = t.concat_cols({p[0], p[1], t.input(x)});
        // Route the steps through a [m,T,d] stack and pull them back out in
        // a different order to exercise both adjoints.
        const ad::NodeId st = t.stack_time({wide, t.affine(wide, -1.0, 0.1)});
        const ad::NodeId d = t.sub(t.slice_time(st, 1), t.slice_time(st, 0));
        return t.mean_all(t.mul(d, d));
      },
      params);
}

TEST_CASE("a node consumed twice accumulates both paths") {
  const Tensor x({3}, {0.5, -1.25, 2.0});
  ad::Tape tape;
  const ad::NodeId p = tape.param(0, x);
  // y = sum(x*x + x), dy/dx = 2x + 1.
  const ad::NodeId loss = tape.sum_all(tape.add(tape.mul(p, p), p));
  const std::vector<Tensor> grads = tape.backward(loss);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(grads[0](i) == doctest::Approx(2.0 * x(i) + 1.0).epsilon(1e-12));
  }
}

TEST_CASE("forward values are eager and addressable") {
  ad::Tape tape;
  const ad::NodeId a = tape.input(Tensor({2, 2}, {1, 2, 3, 4}));
  const ad::NodeId b = tape.input(Tensor({2, 2}, {5, 6, 7, 8}));
  const ad::NodeId c = tape.matmul(a, b);
  CHECK(tape.value(c)(0, 0) == 19.0);
  CHECK(tape.value(c)(0, 1) == 22.0);
  CHECK(tape.value(c)(1, 0) == 43.0);
  CHECK(tape.value(c)(1, 1) == 50.0);

  const ad::NodeId m = tape.mean_all(c);
  CHECK(tape.value(m)(0) == doctest::Approx((19.0 + 22 + 43 + 50) / 4.0));
}

TEST_CASE("softmax rows sum to one") {
  ad::Tape tape;
  const ad::NodeId x = tape.input(Tensor({2, 3}, {0.0, 1.0, -2.0, 5.0, 5.0, 5.0}));
  const Tensor& s = tape.value(tape.softmax(x));
  for (std::size_t i = 0; i < 2; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 3; ++j) row += s(i, j);
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(s(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("tape misuse throws") {
  ad::Tape tape;
  const ad::NodeId p = tape.param(0, Tensor({2}, {1.0, 2.0}));
  CHECK(tape.param(0, Tensor({2}, {9.0, 9.0})) == p);  // dedup, value kept

  const ad::NodeId vec = tape.add(p, p);
  CHECK_THROWS_AS(tape.backward(vec), TapeError);  // non-scalar loss

  const ad::NodeId loss = tape.sum_all(vec);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), TapeError);  // single use

  ad::Tape t2;
  const ad::NodeId a = t2.input(Tensor({2, 3}));
  const ad::NodeId b = t2.input(Tensor({2, 3}));
  CHECK_THROWS_AS(t2.matmul(a, b), ShapeError);
  CHECK_THROWS_AS(t2.add(a, t2.input(Tensor({3, 2}))), ShapeError);
}

TEST_CASE("constant inputs receive no gradient slots") {
  ad::Tape tape;
  const ad::NodeId c = tape.input(Tensor({2}, {3.0, 4.0}));
  const ad::NodeId p = tape.param(5, Tensor({2}, {1.0, 1.0}));
  const std::vector<Tensor> grads = tape.backward(tape.sum_all(tape.mul(c, p)));
  REQUIRE(grads.size() == 6);
  for (std::size_t i = 0; i < 5; ++i) CHECK(grads[i].data.empty());
  CHECK(grads[5](0) == 3.0);
  CHECK(grads[5](1) == 4.0);
}
