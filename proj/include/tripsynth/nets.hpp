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

#ifndef TRIPSYNTH_NETS_HPP_
#define TRIPSYNTH_NETS_HPP_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tripsynth/autodiff.hpp"
#include "tripsynth/rng.hpp"
#include "tripsynth/tensor.hpp"

namespace tripsynth::nets {

// One tabular output head of the generator: a categorical head emits a
// softmax block of `width` probabilities; a numeric head emits one value
// squashed into [-1, 1] (sigmoid then affine).
struct HeadSpec {
  std::string name;
  bool categorical = true;
  std::size_t width = 1;
};

// Architecture description. Defaults are the full-size composite model:
// latent 100, generator trunk 256 with per-variable heads, sequence branch
// repeat-vector into LSTM stack 500/500/500 with a size-5 output LSTM over
// 20 timesteps, discriminator tabular stack 500/200, sequence branch
// BiLSTM 500 per direction into LSTM 100, merge by concatenation into a
// single output unit.
struct NetConfig {
  std::size_t latent_dim = 100;
  std::size_t trunk_width = 256;
  std::vector<std::size_t> g2_stack = {500, 500, 500};
  std::size_t g2_out = 5;
  std::vector<std::size_t> d_tab_stack = {500, 200};
  std::size_t d_bilstm = 500;
  std::size_t d_lstm = 100;
  std::size_t seq_len = 20;  // padded timesteps T
  std::vector<HeadSpec> heads;

  std::size_t tab_width() const;
  void validate() const;  // throws ValueError
};

struct DenseLayer {
  Tensor w;  // [in, out]
  Tensor b;  // [out]
};

// One LSTM cell in the standard forget-gate form (no peepholes):
//   i = sig(xWi + hUi + bi)   f = sig(xWf + hUf + bf)
//   o = sig(xWo + hUo + bo)   g = tanh(xWg + hUg + bg)
//   c' = f.c + i.g            h' = o.tanh(c')
struct LstmCellParams {
  Tensor wi, wf, wo, wg;  // [d, h]
  Tensor ui, uf, uo, ug;  // [h, h]
  Tensor bi, bf, bo, bg;  // [h]

  std::size_t input_dim() const { return wi.shape.empty() ? 0 : wi.shape[0]; }
  std::size_t hidden_dim() const { return wi.shape.empty() ? 0 : wi.shape[1]; }
};

struct GeneratorParams {
  DenseLayer trunk;                  // latent -> trunk_width, relu
  std::vector<DenseLayer> heads;     // trunk -> head width
  std::vector<LstmCellParams> g2;    // repeat-vector LSTM stack
  LstmCellParams g2_out;             // last stack width -> g2_out

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
};

struct DiscriminatorParams {
  std::vector<DenseLayer> tab;       // tabular branch, relu
  LstmCellParams seq_fwd, seq_bwd;   // bidirectional layer
  LstmCellParams seq_top;            // 2*d_bilstm -> d_lstm
  DenseLayer merge;                  // concat -> 1, linear

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
};

// Weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero. Draw order is
// the tensors() enumeration order, elements row-major.
std::pair<GeneratorParams, DiscriminatorParams> init_params(
    const NetConfig& cfg, SeededRng& rng);

// Builds zero-valued parameter structures with the shapes cfg implies.
GeneratorParams build_generator(const NetConfig& cfg);
DiscriminatorParams build_discriminator(const NetConfig& cfg);

// Whether a forward pass registers parameters as tracked leaves (gradients
// flow to them) or as constants.
enum class ParamMode { kTracked, kFrozen };

// Tape-resident views of a parameter set, bound in tensors() order starting
// at base_index.
struct BoundDense {
  autodiff::NodeId w, b;
};
struct BoundLstm {
  autodiff::NodeId wi, wf, wo, wg, ui, uf, uo, ug, bi, bf, bo, bg;
};
struct BoundGenerator {
  BoundDense trunk;
  std::vector<BoundDense> heads;
  std::vector<BoundLstm> g2;
  BoundLstm g2_out;
};
struct BoundDiscriminator {
  std::vector<BoundDense> tab;
  BoundLstm seq_fwd, seq_bwd, seq_top;
  BoundDense merge;
};

BoundGenerator bind_generator(autodiff::Tape& tape, const GeneratorParams& p,
                              ParamMode mode, std::size_t base_index);
BoundDiscriminator bind_discriminator(autodiff::Tape& tape,
                                      const DiscriminatorParams& p,
                                      ParamMode mode, std::size_t base_index);

// One timestep. x [m,d], h and c [m,hdim]; returns (h', c').
std::pair<autodiff::NodeId, autodiff::NodeId> lstm_cell_step(
    autodiff::Tape& tape, const BoundLstm& cell, autodiff::NodeId x,
    autodiff::NodeId h, autodiff::NodeId c);

// Full bidirectional pass over a timestep list. Element t of the result is
// [m, 2h]: forward state after x_0..x_t next to backward state after
// x_{T-1}..x_t.
std::vector<autodiff::NodeId> bidirectional_lstm_forward(
    autodiff::Tape& tape, const BoundLstm& fwd, const BoundLstm& bwd,
    const std::vector<autodiff::NodeId>& xs);

struct GeneratorOut {
  autodiff::NodeId tab;                       // [m, tab_width]
  autodiff::NodeId seq;                       // [m, T, g2_out]
  std::vector<autodiff::NodeId> head_blocks;  // per head, [m, width]
};

// z [m, latent] -> tabular head concat + tanh-bounded sequence.
GeneratorOut generator_forward(autodiff::Tape& tape, const BoundGenerator& g,
                               const NetConfig& cfg, autodiff::NodeId z);

struct DiscriminatorOut {
  autodiff::NodeId logit;  // [m, 1]
  autodiff::NodeId score;  // sigmoid(logit) under standard loss, else logit
};

// tab [m, tab_width], seq [m, T, g2_out] -> joint score.
DiscriminatorOut discriminator_forward(autodiff::Tape& tape,
                                       const BoundDiscriminator& d,
                                       const NetConfig& cfg,
                                       autodiff::NodeId tab,
                                       autodiff::NodeId seq,
                                       bool wasserstein);

}  // namespace tripsynth::nets

#endif  // TRIPSYNTH_NETS_HPP_
