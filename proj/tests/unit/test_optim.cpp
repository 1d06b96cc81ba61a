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
#include <vector>

#include "doctest.h"
#include "tripsynth/error.hpp"
#include "tripsynth/optim.hpp"
#include "tripsynth/rng.hpp"
#include "tripsynth/tensor.hpp"

using tripsynth::SeededRng;
using tripsynth::Tensor;
using tripsynth::ValueError;
namespace optim = tripsynth::optim;

namespace {

std::vector<Tensor> random_grads(SeededRng& rng) {
  return {tripsynth::gaussian_tensor(rng, {3, 4}, 0.0, 1.0),
          tripsynth::gaussian_tensor(rng, {4}, 0.0, 1.0),
          tripsynth::gaussian_tensor(rng, {2, 3, 2}, 0.0, 1.0)};
}

double norm_oracle(const std::vector<Tensor>& grads) {
  double ss = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.data) ss += v * v;
  }
  return std::sqrt(ss);
}

std::vector<Tensor> mean_of(const std::vector<std::vector<Tensor>>& batch) {
  std::vector<Tensor> out = batch[0];
  for (std::size_t e = 1; e < batch.size(); ++e) {
    for (std::size_t t = 0; t < out.size(); ++t) {
      for (std::size_t i = 0; i < out[t].size(); ++i) {
        out[t].data[i] += batch[e][t].data[i];
      }
    }
  }
  for (Tensor& t : out) {
    for (double& v : t.data) v /= static_cast<double>(batch.size());
  }
  return out;
}

}  // namespace

TEST_CASE("global_norm flattens jointly across tensors") {
  SeededRng rng(11);
  const std::vector<Tensor> grads = random_grads(rng);
  CHECK(optim::global_norm(grads) ==
        doctest::Approx(norm_oracle(grads)).epsilon(1e-15));

  const std::vector<Tensor> unit = {Tensor({2}, {3.0, 0.0}),
                                    Tensor({1}, {4.0})};
  CHECK(optim::global_norm(unit) == 5.0);
  CHECK(optim::global_norm({}) == 0.0);
}

TEST_CASE("clip_per_example scales over-bound gradients to the bound") {
  SeededRng rng(12);
  std::vector<Tensor> grads = random_grads(rng);
  const double pre = norm_oracle(grads);
  REQUIRE(pre > 1.0);

  std::vector<Tensor> clipped = grads;
  const double reported = optim::clip_per_example(clipped, 1.0);
  CHECK(reported == doctest::Approx(pre).epsilon(1e-15));
  CHECK(optim::global_norm(clipped) <= 1.0 + 1e-9);
  CHECK(optim::global_norm(clipped) == doctest::Approx(1.0).epsilon(1e-12));
  // Direction is preserved: clipped = grads * (C/pre).
  for (std::size_t t = 0; t < grads.size(); ++t) {
    for (std::size_t i = 0; i < grads[t].size(); ++i) {
      CHECK(clipped[t].data[i] ==
            doctest::Approx(grads[t].data[i] / pre).epsilon(1e-12));
    }
  }
}

TEST_CASE("clip_per_example leaves under-bound gradients bitwise untouched") {
  SeededRng rng(13);
  std::vector<Tensor> grads = random_grads(rng);
  const std::vector<Tensor> before = grads;
  const double pre = norm_oracle(grads);
  const double reported = optim::clip_per_example(grads, pre * 2.0);
  CHECK(reported == doctest::Approx(pre).epsilon(1e-15));
  for (std::size_t t = 0; t < grads.size(); ++t) {
    CHECK(grads[t].data == before[t].data);
  }
  // A bound exactly at the norm is also non-binding.
  std::vector<Tensor> at = before;
  optim::clip_per_example(at, reported);
  for (std::size_t t = 0; t < at.size(); ++t) {
    CHECK(at[t].data == before[t].data);
  }
}

TEST_CASE("sigma zero with a non-binding bound reduces to mean SGD") {
  SeededRng rng(14);
  std::vector<std::vector<Tensor>> batch;
  double max_norm = 0.0;
  for (int e = 0; e < 4; ++e) {
    batch.push_back(random_grads(rng));
    max_norm = std::max(max_norm, norm_oracle(batch.back()));
  }
  const std::vector<Tensor> mean = mean_of(batch);

  std::vector<Tensor*> params;
  std::vector<Tensor> w;
  for (const Tensor& g : mean) w.emplace_back(g.shape);
  for (Tensor& t : w) params.push_back(&t);

  optim::DpSgdState state;
  state.lr = 0.5;
  state.privacy.enabled = true;
  state.privacy.noise_multiplier = 0.0;
  state.privacy.clip_norm = max_norm * 10.0;
  SeededRng noise(99);
  const optim::StepStats stats =
      optim::dp_discriminator_step(params, batch, state, noise);

  for (std::size_t t = 0; t < w.size(); ++t) {
    for (std::size_t i = 0; i < w[t].size(); ++i) {
      CHECK(std::abs(w[t].data[i] - (-0.5 * mean[t].data[i])) < 1e-12);
    }
  }
  CHECK(stats.preclip_max <= max_norm + 1e-12);
  CHECK(stats.preclip_mean > 0.0);
  CHECK(stats.preclip_mean <= stats.preclip_max + 1e-12);
  // No noise means no randomness consumed.
  CHECK(noise.counter() == 0);
}

TEST_CASE("privacy disabled is plain minibatch SGD even with sigma set") {
  SeededRng rng(15);
  std::vector<std::vector<Tensor>> batch;
  for (int e = 0; e < 3; ++e) batch.push_back(random_grads(rng));
  const std::vector<Tensor> mean = mean_of(batch);

  std::vector<Tensor> w;
  for (const Tensor& g : mean) w.emplace_back(g.shape);
  std::vector<Tensor*> params;
  for (Tensor& t : w) params.push_back(&t);

  optim::DpSgdState state;
  state.lr = 1.0;
  state.privacy.enabled = false;
  state.privacy.noise_multiplier = 3.0;  // must be ignored
  state.privacy.clip_norm = 1e-6;        // must be ignored
  SeededRng noise(7);
  optim::dp_discriminator_step(params, batch, state, noise);

  for (std::size_t t = 0; t < w.size(); ++t) {
    for (std::size_t i = 0; i < w[t].size(); ++i) {
      CHECK(std::abs(w[t].data[i] - (-mean[t].data[i])) < 1e-12);
    }
  }
  CHECK(noise.counter() == 0);
}

TEST_CASE("noise injected into the sum has standard deviation sigma*C") {
  // One example of all-zero gradients isolates the noise: the aggregated
  // value is exactly N(0, (sigma*C)^2) / B with B = 1.
  const std::size_t n = 120000;
  std::vector<std::vector<Tensor>> batch(1);
  batch[0].emplace_back(std::vector<std::size_t>{n});

  optim::PrivacyConfig privacy;
  privacy.enabled = true;
  privacy.noise_multiplier = 2.0;
  privacy.clip_norm = 1.5;
  SeededRng noise(21);
  const std::vector<Tensor> agg =
      optim::privatize_sum(batch, privacy, noise);

  REQUIRE(agg.size() == 1);
  REQUIRE(agg[0].size() == n);
  double sum = 0.0, ss = 0.0;
  for (double v : agg[0].data) {
    sum += v;
    ss += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(ss / n - mean * mean);
  const double target = 2.0 * 1.5;
  CHECK(std::abs(mean) < 0.05);
  CHECK(sd == doctest::Approx(target).epsilon(0.02));
}

TEST_CASE("noise draw order is flat tensor-then-row-major") {
  std::vector<std::vector<Tensor>> batch(2);
  for (int e = 0; e < 2; ++e) {
    batch[e].emplace_back(std::vector<std::size_t>{2, 3});
    batch[e].emplace_back(std::vector<std::size_t>{4});
    for (Tensor& t : batch[e]) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        t.data[i] = 0.1 * static_cast<double>(e + 1) * static_cast<double>(i);
      }
    }
  }

  optim::PrivacyConfig privacy;
  privacy.enabled = true;
  privacy.noise_multiplier = 0.7;
  privacy.clip_norm = 2.0;
  SeededRng noise(33);
  const std::vector<Tensor> agg = optim::privatize_sum(batch, privacy, noise);

  // Replay: same seed, draws consumed coordinate by coordinate in the same
  // order the aggregate enumerates them.
  SeededRng replay(33);
  const double scale = 0.7 * 2.0;
  std::size_t checked = 0;
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t i = 0; i < batch[0][t].size(); ++i) {
      const double s = batch[0][t].data[i] + batch[1][t].data[i] +
                       replay.gaussian(0.0, scale);
      CHECK(agg[t].data[i] == s / 2.0);
      ++checked;
    }
  }
  CHECK(checked == 10);
  CHECK(noise.counter() == replay.counter());
}

TEST_CASE("clipped sums move by at most 2C when one example is replaced") {
  SeededRng rng(16);
  const double C = 0.8;
  std::vector<std::vector<Tensor>> batch;
  for (int e = 0; e < 5; ++e) {
    batch.push_back(random_grads(rng));
    optim::clip_per_example(batch.back(), C);
  }
  std::vector<std::vector<Tensor>> swapped = batch;
  swapped[2] = random_grads(rng);
  optim::clip_per_example(swapped[2], C);

  optim::PrivacyConfig privacy;  // enabled, sigma 0: pure clipped mean
  privacy.noise_multiplier = 0.0;
  privacy.clip_norm = C;
  SeededRng noise(1);
  const std::vector<Tensor> a = optim::privatize_sum(batch, privacy, noise);
  const std::vector<Tensor> b = optim::privatize_sum(swapped, privacy, noise);

  // Means differ by (g'_2 - g_2)/B; the corresponding sums by at most 2C.
  std::vector<Tensor> diff = a;
  for (std::size_t t = 0; t < diff.size(); ++t) {
    for (std::size_t i = 0; i < diff[t].size(); ++i) {
      diff[t].data[i] = (a[t].data[i] - b[t].data[i]) * 5.0;
    }
  }
  CHECK(optim::global_norm(diff) <= 2.0 * C + 1e-9);
}

TEST_CASE("rmsprop first step matches the update formula") {
  Tensor w(std::vector<std::size_t>{2});
  Tensor g({2}, {1.0, -2.0});
  std::vector<Tensor*> params = {&w};
  optim::RmspropState state =
      optim::RmspropState::init({&w}, 1e-3, 0.9, 1e-8);
  optim::rmsprop_step(params, {g}, state);

  // Bit-exact replay of the documented update in the same operation order.
  for (std::size_t i = 0; i < 2; ++i) {
    const double v = 0.9 * 0.0 + (1.0 - 0.9) * (g.data[i] * g.data[i]);
    const double expect = 0.0 - 1e-3 * (g.data[i] / (std::sqrt(v) + 1e-8));
    CHECK(w.data[i] == expect);
    CHECK(state.v[0].data[i] == v);
  }

  // Second step accumulates v with decay.
  Tensor g2({2}, {0.5, 0.5});
  const Tensor v_before = state.v[0];
  const Tensor w_before = w;
  optim::rmsprop_step(params, {g2}, state);
  for (std::size_t i = 0; i < 2; ++i) {
    const double v =
        0.9 * v_before.data[i] + (1.0 - 0.9) * (g2.data[i] * g2.data[i]);
    CHECK(state.v[0].data[i] == v);
    CHECK(w.data[i] ==
          w_before.data[i] - 1e-3 * (g2.data[i] / (std::sqrt(v) + 1e-8)));
  }
}

TEST_CASE("configuration validation rejects bad values") {
  optim::PrivacyConfig p;
  p.noise_multiplier = -0.1;
  CHECK_THROWS_AS(p.validate(), ValueError);
  p.noise_multiplier = 1.0;
  p.clip_norm = 0.0;
  CHECK_THROWS_AS(p.validate(), ValueError);
  p.clip_norm = -1.0;
  CHECK_THROWS_AS(p.validate(), ValueError);
  p.clip_norm = 1.0;
  CHECK_NOTHROW(p.validate());
  p.noise_multiplier = 0.0;
  CHECK_NOTHROW(p.validate());

  Tensor w(std::vector<std::size_t>{1});
  const std::vector<const Tensor*> ps = {&w};
  CHECK_THROWS_AS(optim::RmspropState::init(ps, 0.0, 0.9, 1e-8), ValueError);
  CHECK_THROWS_AS(optim::RmspropState::init(ps, 1e-3, 1.0, 1e-8), ValueError);
  CHECK_THROWS_AS(optim::RmspropState::init(ps, 1e-3, -0.1, 1e-8), ValueError);
  CHECK_THROWS_AS(optim::RmspropState::init(ps, 1e-3, 0.9, 0.0), ValueError);
  CHECK_NOTHROW(optim::RmspropState::init(ps, 1e-3, 0.9, 1e-8));
}

TEST_CASE("privatize_sum validates its inputs") {
  optim::PrivacyConfig privacy;
  SeededRng noise(1);
  CHECK_THROWS_AS(optim::privatize_sum({}, privacy, noise), ValueError);

  std::vector<std::vector<Tensor>> ragged(2);
  ragged[0].emplace_back(std::vector<std::size_t>{2});
  ragged[1].emplace_back(std::vector<std::size_t>{3});
  CHECK_THROWS_AS(optim::privatize_sum(ragged, privacy, noise),
                  tripsynth::ShapeError);
}
