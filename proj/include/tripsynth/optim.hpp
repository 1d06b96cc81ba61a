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

#ifndef TRIPSYNTH_OPTIM_HPP_
#define TRIPSYNTH_OPTIM_HPP_

#include <cstddef>
#include <vector>

#include "tripsynth/rng.hpp"
#include "tripsynth/tensor.hpp"

namespace tripsynth::optim {

// Differential privacy knobs for the discriminator update. enabled=false is
// the fully non-private baseline (no clipping, no noise); enabled=true with
// noise_multiplier 0 clips per-example gradients but adds no noise.
struct PrivacyConfig {
  bool enabled = true;
  double noise_multiplier = 0.0;  // sigma
  double clip_norm = 1.0;         // C
  void validate() const;          // throws ValueError
};

// Per-parameter-tensor second-moment accumulator for RMSProp:
//   v <- rho*v + (1-rho)*g^2 ; w <- w - lr * g / (sqrt(v) + eps)
struct RmspropState {
  double lr = 5e-4;
  double rho = 0.9;
  double eps = 1e-8;
  std::vector<Tensor> v;

  static RmspropState init(const std::vector<const Tensor*>& params, double lr,
                           double rho, double eps);
};

struct DpSgdState {
  double lr = 5e-4;
  PrivacyConfig privacy;
};

// L2 norm of one example's gradients flattened jointly across every tensor.
double global_norm(const std::vector<Tensor>& grads);

// Scales grads in place by min(1, clip_norm/norm); returns the pre-clip
// norm. Gradients at or under the bound are untouched bit for bit.
double clip_per_example(std::vector<Tensor>& grads, double clip_norm);

// Aggregates per-example gradients: sums in ascending example order, adds
// N(0, (sigma*C)^2) per coordinate to the sum when sigma > 0 (draws in flat
// tensor-then-row-major order; sigma = 0 consumes no draws), divides by the
// example count.
std::vector<Tensor> privatize_sum(
    const std::vector<std::vector<Tensor>>& per_example,
    const PrivacyConfig& privacy, SeededRng& noise_rng);

struct StepStats {
  double preclip_mean = 0.0;
  double preclip_max = 0.0;
};

// One discriminator update: clip (when privacy.enabled), aggregate with
// noise, then a plain SGD step. With privacy disabled this is exactly
// minibatch SGD with mean reduction over the same gradients.
StepStats dp_discriminator_step(const std::vector<Tensor*>& params,
                                std::vector<std::vector<Tensor>> per_example,
                                const DpSgdState& state, SeededRng& noise_rng);

void rmsprop_step(const std::vector<Tensor*>& params,
                  const std::vector<Tensor>& grads, RmspropState& state);

}  // namespace tripsynth::optim

#endif  // TRIPSYNTH_OPTIM_HPP_
