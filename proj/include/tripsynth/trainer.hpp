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

#ifndef TRIPSYNTH_TRAINER_HPP_
#define TRIPSYNTH_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tripsynth/data.hpp"
#include "tripsynth/nets.hpp"
#include "tripsynth/optim.hpp"

// Adversarial training loop: each step runs disc_steps discriminator
// updates (per-example gradients, optionally clipped and noised, then SGD)
// followed by one RMSProp generator update. Every random draw comes from a
// substream derived from (seed, purpose tag, counter), so a resumed run
// consumes the same streams as an uninterrupted one and the whole
// trajectory is a pure function of (dataset, config).
namespace tripsynth::train {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch = 64;
  std::size_t disc_steps = 1;  // discriminator updates per generator update
  bool wasserstein = false;
  double weight_clip = 0.01;   // per-tensor bound, wasserstein variant only
  double lr_d = 5e-4;
  double lr_g = 5e-4;
  double rho = 0.9;            // generator RMSProp decay
  double eps = 1e-8;
  optim::PrivacyConfig privacy;
  std::uint64_t seed = 1;
  std::size_t threads = 1;     // reserved; reduction order is example order
  nets::NetConfig net;

  void validate() const;  // throws ValueError
};

nlohmann::ordered_json net_config_to_json(const nets::NetConfig& n);
nets::NetConfig net_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

// One row per training step. d_loss and the gradient-norm statistics come
// from the step's last discriminator update.
struct StepRecord {
  std::size_t step = 0;  // index of the completed step, 0-based
  double d_loss = 0.0;
  double g_loss = 0.0;
  double preclip_mean = 0.0;
  double preclip_max = 0.0;
  std::int64_t millis = 0;  // wall time of the step; excluded from
                            // reproducibility comparisons
};

struct TrainHistory {
  std::vector<StepRecord> steps;

  // CSV with header step,d_loss,g_loss,preclip_mean,preclip_max,millis.
  void save_csv(const std::filesystem::path& path) const;
};

// Self-contained training state; reloading and resuming reproduces the
// uninterrupted trajectory bit for bit (all RNG streams are counter-derived
// from cfg.seed, so no live generator state needs saving).
struct Checkpoint {
  TrainConfig cfg;
  data::Codec codec;
  nets::GeneratorParams gen;
  nets::DiscriminatorParams disc;
  optim::RmspropState opt_g;
  std::size_t step = 0;  // completed training steps
};

// Binary container, magic "DPCT", version 1, atomic replace on save.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct TrainResult {
  Checkpoint state;
  TrainHistory history;
};

// Fresh run: initializes parameters from the seed and trains
// epochs * floor(n/batch) steps (stopping early at stop_after when
// nonzero). Throws TrainingError naming the step on a NaN loss.
TrainResult train(const data::Dataset& ds, const TrainConfig& cfg,
                  std::size_t stop_after = 0);

// Continues a loaded checkpoint over the same dataset to the configured
// total (or stop_after); equivalent to never having stopped.
TrainResult resume(const Checkpoint& start, const data::Dataset& ds,
                   std::size_t stop_after = 0);

// Draws n synthetic agents from the generator: z ~ N(0, I) in fixed-size
// chunks, forward pass, decode (argmax heads, affine inverse, sequence cut
// at the first END purpose). Deterministic in (checkpoint, seed).
std::vector<data::RawRecord> sample_agents(const Checkpoint& c, std::size_t n,
                                           std::uint64_t seed);

// Encoded variant of sample_agents for metric pipelines that want the raw
// generator output.
std::vector<data::EncodedAgent> sample_encoded(const Checkpoint& c,
                                               std::size_t n,
                                               std::uint64_t seed);

// Discriminator scores for encoded agents: sigmoid probability under the
// standard loss, raw critic value under wasserstein.
std::vector<double> discriminator_scores(const Checkpoint& c,
                                         const std::vector<data::EncodedAgent>& agents);

}  // namespace tripsynth::train

#endif  // TRIPSYNTH_TRAINER_HPP_
