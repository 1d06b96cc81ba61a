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

#include "tripsynth/optim.hpp"

#include <cmath>
#include <string>

#include "tripsynth/error.hpp"
#include "tripsynth/kernels.hpp"

namespace tripsynth::optim {

void PrivacyConfig::validate() const {
  if (noise_multiplier < 0.0) {
    throw ValueError("noise_multiplier must be nonnegative");
  }
  if (enabled && clip_norm <= 0.0) {
    throw ValueError("clip_norm must be positive when privacy is enabled");
  }
}

RmspropState RmspropState::init(const std::vector<const Tensor*>& params,
                                double lr, double rho, double eps) {
  if (lr <= 0.0) throw ValueError("rmsprop lr must be positive");
  if (rho <= 0.0 || rho >= 1.0) throw ValueError("rmsprop rho must be in (0,1)");
  if (eps <= 0.0) throw ValueError("rmsprop eps must be positive");
  RmspropState s;
  s.lr = lr;
  s.rho = rho;
  s.eps = eps;
  for (const Tensor* t : params) s.v.emplace_back(t->shape);
  return s;
}

double global_norm(const std::vector<Tensor>& grads) {
  double total = 0.0;
  for (const Tensor& g : grads) {
    if (g.data.empty()) continue;
    total += kernels::table().sum_sq(g.data.data(), g.size());
  }
  return std::sqrt(total);
}

double clip_per_example(std::vector<Tensor>& grads, double clip_norm) {
  if (clip_norm <= 0.0) throw ValueError("clip_norm must be positive");
  const double norm = global_norm(grads);
  if (norm > clip_norm) {
    const double factor = clip_norm / norm;
    for (Tensor& g : grads) {
      if (g.data.empty()) continue;
      kernels::table().affine(g.data.data(), g.data.data(), factor, 0.0,
                              g.size());
    }
  }
  return norm;
}

std::vector<Tensor> privatize_sum(
    const std::vector<std::vector<Tensor>>& per_example,
    const PrivacyConfig& privacy, SeededRng& noise_rng) {
  privacy.validate();
  if (per_example.empty()) {
    throw ValueError("privatize_sum needs at least one example gradient");
  }
  const std::size_t n_tensors = per_example.front().size();
  for (const auto& ex : per_example) {
    if (ex.size() != n_tensors) {
      throw ShapeError("per-example gradient sets differ in tensor count: " +
                       std::to_string(n_tensors) + " vs " +
                       std::to_string(ex.size()));
    }
  }

  std::vector<Tensor> agg;
  agg.reserve(n_tensors);
  for (std::size_t t = 0; t < n_tensors; ++t) {
    agg.emplace_back(per_example.front()[t].shape);
  }
  for (const auto& ex : per_example) {
    for (std::size_t t = 0; t < n_tensors; ++t) {
      require_same_shape(agg[t], ex[t], "privatize_sum");
      kernels::table().add(agg[t].data.data(), agg[t].data.data(),
                           ex[t].data.data(), agg[t].size());
    }
  }

  const double noise_std = privacy.noise_multiplier * privacy.clip_norm;
  if (noise_std > 0.0) {
    for (Tensor& t : agg) {
      for (double& x : t.data) x += noise_rng.gaussian(0.0, noise_std);
    }
  }

  const double inv_b = 1.0 / static_cast<double>(per_example.size());
  for (Tensor& t : agg) {
    kernels::table().affine(t.data.data(), t.data.data(), inv_b, 0.0,
                            t.size());
  }
  return agg;
}

StepStats dp_discriminator_step(const std::vector<Tensor*>& params,
                                std::vector<std::vector<Tensor>> per_example,
                                const DpSgdState& state, SeededRng& noise_rng) {
  if (state.lr <= 0.0) throw ValueError("dp sgd lr must be positive");
  state.privacy.validate();
  if (per_example.empty()) {
    throw ValueError("dp_discriminator_step needs a nonempty batch");
  }

  StepStats stats;
  double norm_sum = 0.0;
  for (auto& ex : per_example) {
    double norm;
    if (state.privacy.enabled) {
      norm = clip_per_example(ex, state.privacy.clip_norm);
    } else {
      norm = global_norm(ex);
    }
    norm_sum += norm;
    stats.preclip_max = norm > stats.preclip_max ? norm : stats.preclip_max;
  }
  stats.preclip_mean = norm_sum / static_cast<double>(per_example.size());

  PrivacyConfig agg_cfg = state.privacy;
  if (!agg_cfg.enabled) agg_cfg.noise_multiplier = 0.0;
  std::vector<Tensor> grad = privatize_sum(per_example, agg_cfg, noise_rng);

  if (grad.size() != params.size()) {
    throw ShapeError("gradient tensor count " + std::to_string(grad.size()) +
                     " does not match parameter count " +
                     std::to_string(params.size()));
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    require_same_shape(*params[t], grad[t], "dp_discriminator_step");
    kernels::table().axpy(params[t]->data.data(), -state.lr,
                          grad[t].data.data(), grad[t].size());
  }
  return stats;
}

void rmsprop_step(const std::vector<Tensor*>& params,
                  const std::vector<Tensor>& grads, RmspropState& state) {
  if (params.size() != grads.size() || params.size() != state.v.size()) {
    throw ShapeError("rmsprop_step tensor counts disagree: " +
                     std::to_string(params.size()) + " params vs " +
                     std::to_string(grads.size()) + " grads vs " +
                     std::to_string(state.v.size()) + " state");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    require_same_shape(*params[t], grads[t], "rmsprop_step");
    kernels::table().rmsprop(params[t]->data.data(), state.v[t].data.data(),
                             grads[t].data.data(), state.rho, state.lr,
                             state.eps, grads[t].size());
  }
}

}  // namespace tripsynth::optim
