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

#include "tripsynth/nets.hpp"

#include <cmath>
#include <string>

#include "tripsynth/error.hpp"

namespace tripsynth::nets {

using autodiff::NodeId;
using autodiff::Tape;

namespace {

// Single source of truth for parameter enumeration order; serialization,
// initialization, and tape binding all walk this.
template <typename Dense, typename F>
void visit_dense(Dense& d, F&& f) {
  f(d.w);
  f(d.b);
}

template <typename Cell, typename F>
void visit_lstm(Cell& c, F&& f) {
  f(c.wi);
  f(c.wf);
  f(c.wo);
  f(c.wg);
  f(c.ui);
  f(c.uf);
  f(c.uo);
  f(c.ug);
  f(c.bi);
  f(c.bf);
  f(c.bo);
  f(c.bg);
}

template <typename Params, typename F>
void visit_generator(Params& p, F&& f) {
  visit_dense(p.trunk, f);
  for (auto& h : p.heads) visit_dense(h, f);
  for (auto& cell : p.g2) visit_lstm(cell, f);
  visit_lstm(p.g2_out, f);
}

template <typename Params, typename F>
void visit_discriminator(Params& p, F&& f) {
  for (auto& l : p.tab) visit_dense(l, f);
  visit_lstm(p.seq_fwd, f);
  visit_lstm(p.seq_bwd, f);
  visit_lstm(p.seq_top, f);
  visit_dense(p.merge, f);
}

DenseLayer make_dense(std::size_t in, std::size_t out) {
  DenseLayer d;
  d.w = Tensor({in, out});
  d.b = Tensor({out});
  return d;
}

LstmCellParams make_lstm(std::size_t in, std::size_t hidden) {
  LstmCellParams c;
  for (Tensor* t : {&c.wi, &c.wf, &c.wo, &c.wg}) *t = Tensor({in, hidden});
  for (Tensor* t : {&c.ui, &c.uf, &c.uo, &c.ug}) *t = Tensor({hidden, hidden});
  for (Tensor* t : {&c.bi, &c.bf, &c.bo, &c.bg}) *t = Tensor({hidden});
  return c;
}

// Fan-based uniform bound for a weight tensor; biases stay zero.
void init_tensor(Tensor& t, SeededRng& rng) {
  if (t.rank() == 1) return;  // bias
  const double fan_in = static_cast<double>(t.shape[0]);
  const double fan_out = static_cast<double>(t.shape[1]);
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& x : t.data) x = rng.uniform(-bound, bound);
}

class Binder {
 public:
  Binder(Tape& tape, ParamMode mode, std::size_t base)
      : tape_(tape), mode_(mode), next_(base) {}

  NodeId operator()(const Tensor& t) {
    if (mode_ == ParamMode::kTracked) return tape_.param(next_++, t);
    ++next_;
    return tape_.input(t);
  }

 private:
  Tape& tape_;
  ParamMode mode_;
  std::size_t next_;
};

NodeId dense_forward(Tape& tape, const BoundDense& d, NodeId x) {
  return tape.add_rowvec(tape.matmul(x, d.w), d.b);
}

}  // namespace

std::size_t NetConfig::tab_width() const {
  std::size_t w = 0;
  for (const HeadSpec& h : heads) w += h.width;
  return w;
}

void NetConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ValueError(std::string(what) + " must be positive");
  };
  positive(latent_dim, "latent_dim");
  positive(trunk_width, "trunk_width");
  positive(g2_out, "g2_out");
  positive(d_bilstm, "d_bilstm");
  positive(d_lstm, "d_lstm");
  if (g2_stack.empty()) throw ValueError("g2_stack must be nonempty");
  for (std::size_t w : g2_stack) positive(w, "g2_stack width");
  if (d_tab_stack.empty()) throw ValueError("d_tab_stack must be nonempty");
  for (std::size_t w : d_tab_stack) positive(w, "d_tab_stack width");
  if (seq_len < 3) {
    throw ValueError("seq_len must be at least 3, got " +
                     std::to_string(seq_len));
  }
  if (heads.empty()) throw ValueError("a NetConfig needs at least one head");
  for (const HeadSpec& h : heads) {
    positive(h.width, "head width");
    if (h.categorical && h.width < 2) {
      throw ValueError("categorical head " + h.name +
                       " needs at least two categories");
    }
    if (!h.categorical && h.width != 1) {
      throw ValueError("numeric head " + h.name + " must have width 1");
    }
  }
}

std::vector<Tensor*> GeneratorParams::tensors() {
  std::vector<Tensor*> out;
  visit_generator(*this, [&](Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<const Tensor*> GeneratorParams::tensors() const {
  std::vector<const Tensor*> out;
  visit_generator(*this, [&](const Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<Tensor*> DiscriminatorParams::tensors() {
  std::vector<Tensor*> out;
  visit_discriminator(*this, [&](Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<const Tensor*> DiscriminatorParams::tensors() const {
  std::vector<const Tensor*> out;
  visit_discriminator(*this, [&](const Tensor& t) { out.push_back(&t); });
  return out;
}

GeneratorParams build_generator(const NetConfig& cfg) {
  cfg.validate();
  GeneratorParams g;
  g.trunk = make_dense(cfg.latent_dim, cfg.trunk_width);
  for (const HeadSpec& h : cfg.heads) {
    g.heads.push_back(make_dense(cfg.trunk_width, h.width));
  }
  std::size_t in = cfg.trunk_width;
  for (std::size_t w : cfg.g2_stack) {
    g.g2.push_back(make_lstm(in, w));
    in = w;
  }
  g.g2_out = make_lstm(in, cfg.g2_out);
  return g;
}

DiscriminatorParams build_discriminator(const NetConfig& cfg) {
  cfg.validate();
  DiscriminatorParams d;
  std::size_t in = cfg.tab_width();
  for (std::size_t w : cfg.d_tab_stack) {
    d.tab.push_back(make_dense(in, w));
    in = w;
  }
  d.seq_fwd = make_lstm(cfg.g2_out, cfg.d_bilstm);
  d.seq_bwd = make_lstm(cfg.g2_out, cfg.d_bilstm);
  d.seq_top = make_lstm(2 * cfg.d_bilstm, cfg.d_lstm);
  d.merge = make_dense(cfg.d_tab_stack.back() + cfg.d_lstm, 1);
  return d;
}

std::pair<GeneratorParams, DiscriminatorParams> init_params(
    const NetConfig& cfg, SeededRng& rng) {
  GeneratorParams g = build_generator(cfg);
  DiscriminatorParams d = build_discriminator(cfg);
  visit_generator(g, [&](Tensor& t) { init_tensor(t, rng); });
  visit_discriminator(d, [&](Tensor& t) { init_tensor(t, rng); });
  return {std::move(g), std::move(d)};
}

BoundGenerator bind_generator(Tape& tape, const GeneratorParams& p,
                              ParamMode mode, std::size_t base_index) {
  Binder bind(tape, mode, base_index);
  BoundGenerator out;
  out.trunk = {bind(p.trunk.w), bind(p.trunk.b)};
  for (const DenseLayer& h : p.heads) out.heads.push_back({bind(h.w), bind(h.b)});
  auto bind_cell = [&](const LstmCellParams& c) {
    BoundLstm b;
    b.wi = bind(c.wi); b.wf = bind(c.wf); b.wo = bind(c.wo); b.wg = bind(c.wg);
    b.ui = bind(c.ui); b.uf = bind(c.uf); b.uo = bind(c.uo); b.ug = bind(c.ug);
    b.bi = bind(c.bi); b.bf = bind(c.bf); b.bo = bind(c.bo); b.bg = bind(c.bg);
    return b;
  };
  for (const LstmCellParams& c : p.g2) out.g2.push_back(bind_cell(c));
  out.g2_out = bind_cell(p.g2_out);
  return out;
}

BoundDiscriminator bind_discriminator(Tape& tape, const DiscriminatorParams& p,
                                      ParamMode mode, std::size_t base_index) {
  Binder bind(tape, mode, base_index);
  BoundDiscriminator out;
  for (const DenseLayer& l : p.tab) out.tab.push_back({bind(l.w), bind(l.b)});
  auto bind_cell = [&](const LstmCellParams& c) {
    BoundLstm b;
    b.wi = bind(c.wi); b.wf = bind(c.wf); b.wo = bind(c.wo); b.wg = bind(c.wg);
    b.ui = bind(c.ui); b.uf = bind(c.uf); b.uo = bind(c.uo); b.ug = bind(c.ug);
    b.bi = bind(c.bi); b.bf = bind(c.bf); b.bo = bind(c.bo); b.bg = bind(c.bg);
    return b;
  };
  out.seq_fwd = bind_cell(p.seq_fwd);
  out.seq_bwd = bind_cell(p.seq_bwd);
  out.seq_top = bind_cell(p.seq_top);
  out.merge = {bind(p.merge.w), bind(p.merge.b)};
  return out;
}

std::pair<NodeId, NodeId> lstm_cell_step(Tape& tape, const BoundLstm& cell,
                                         NodeId x, NodeId h, NodeId c) {
  auto gate = [&](NodeId w, NodeId u, NodeId b) {
    return tape.add_rowvec(tape.add(tape.matmul(x, w), tape.matmul(h, u)), b);
  };
  NodeId i = tape.sigmoid(gate(cell.wi, cell.ui, cell.bi));
  NodeId f = tape.sigmoid(gate(cell.wf, cell.uf, cell.bf));
  NodeId o = tape.sigmoid(gate(cell.wo, cell.uo, cell.bo));
  NodeId g = tape.tanh(gate(cell.wg, cell.ug, cell.bg));
  NodeId c_next = tape.add(tape.mul(f, c), tape.mul(i, g));
  NodeId h_next = tape.mul(o, tape.tanh(c_next));
  return {h_next, c_next};
}

std::vector<NodeId> bidirectional_lstm_forward(Tape& tape, const BoundLstm& fwd,
                                               const BoundLstm& bwd,
                                               const std::vector<NodeId>& xs) {
  if (xs.empty()) {
    throw ValueError("bidirectional_lstm_forward needs at least one timestep");
  }
  const Tensor& x0 = tape.value(xs[0]);
  const std::size_t m = x0.shape[0];
  const std::size_t T = xs.size();

  auto run = [&](const BoundLstm& cell, bool reverse) {
    const std::size_t hdim = tape.value(cell.bi).shape[0];
    NodeId h = tape.input(Tensor({m, hdim}));
    NodeId c = tape.input(Tensor({m, hdim}));
    std::vector<NodeId> states(T);
    for (std::size_t step = 0; step < T; ++step) {
      const std::size_t t = reverse ? T - 1 - step : step;
      auto [hn, cn] = lstm_cell_step(tape, cell, xs[t], h, c);
      h = hn;
      c = cn;
      states[t] = h;
    }
    return states;
  };

  std::vector<NodeId> fwd_states = run(fwd, false);
  std::vector<NodeId> bwd_states = run(bwd, true);
  std::vector<NodeId> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    out[t] = tape.concat_cols({fwd_states[t], bwd_states[t]});
  }
  return out;
}

GeneratorOut generator_forward(Tape& tape, const BoundGenerator& g,
                               const NetConfig& cfg, NodeId z) {
  const Tensor& zt = tape.value(z);
  if (zt.rank() != 2 || zt.shape[1] != cfg.latent_dim) {
    throw ShapeError("generator_forward: latent shape " + zt.shape_str() +
                     " does not match [m x " +
                     std::to_string(cfg.latent_dim) + "]");
  }
  const std::size_t m = zt.shape[0];

  NodeId trunk = tape.relu(dense_forward(tape, g.trunk, z));

  GeneratorOut out;
  std::vector<NodeId> blocks;
  for (std::size_t i = 0; i < cfg.heads.size(); ++i) {
    NodeId logits = dense_forward(tape, g.heads[i], trunk);
    NodeId block;
    if (cfg.heads[i].categorical) {
      block = tape.softmax(logits);
    } else {
      // sigmoid squashes to (0,1); rescale into the encoded domain (-1,1).
      block = tape.affine(tape.sigmoid(logits), 2.0, -1.0);
    }
    blocks.push_back(block);
  }
  out.head_blocks = blocks;
  out.tab = tape.concat_cols(blocks);

  // Sequence branch: the trunk output is repeated as the input of every
  // timestep, then pushed through the LSTM stack.
  std::vector<NodeId> xs(cfg.seq_len, trunk);
  for (const BoundLstm& cell : g.g2) {
    const std::size_t hdim = tape.value(cell.bi).shape[0];
    NodeId h = tape.input(Tensor({m, hdim}));
    NodeId c = tape.input(Tensor({m, hdim}));
    for (std::size_t t = 0; t < cfg.seq_len; ++t) {
      auto [hn, cn] = lstm_cell_step(tape, cell, xs[t], h, c);
      h = hn;
      c = cn;
      xs[t] = h;
    }
  }
  {
    const std::size_t hdim = tape.value(g.g2_out.bi).shape[0];
    NodeId h = tape.input(Tensor({m, hdim}));
    NodeId c = tape.input(Tensor({m, hdim}));
    for (std::size_t t = 0; t < cfg.seq_len; ++t) {
      auto [hn, cn] = lstm_cell_step(tape, g.g2_out, xs[t], h, c);
      h = hn;
      c = cn;
      xs[t] = tape.tanh(h);
    }
  }
  out.seq = tape.stack_time(xs);
  return out;
}

DiscriminatorOut discriminator_forward(Tape& tape, const BoundDiscriminator& d,
                                       const NetConfig& cfg, NodeId tab,
                                       NodeId seq, bool wasserstein) {
  const Tensor& tt = tape.value(tab);
  if (tt.rank() != 2 || tt.shape[1] != cfg.tab_width()) {
    throw ShapeError("discriminator_forward: tabular shape " + tt.shape_str() +
                     " does not match [m x " +
                     std::to_string(cfg.tab_width()) + "]");
  }
  const Tensor& st = tape.value(seq);
  if (st.rank() != 3 || st.shape[0] != tt.shape[0] ||
      st.shape[1] != cfg.seq_len || st.shape[2] != cfg.g2_out) {
    throw ShapeError("discriminator_forward: sequence shape " + st.shape_str() +
                     " does not match [" + std::to_string(tt.shape[0]) + " x " +
                     std::to_string(cfg.seq_len) + " x " +
                     std::to_string(cfg.g2_out) + "]");
  }
  const std::size_t m = tt.shape[0];

  NodeId t = tab;
  for (const BoundDense& layer : d.tab) {
    t = tape.relu(dense_forward(tape, layer, t));
  }

  std::vector<NodeId> xs(cfg.seq_len);
  for (std::size_t step = 0; step < cfg.seq_len; ++step) {
    xs[step] = tape.slice_time(seq, step);
  }
  std::vector<NodeId> bi = bidirectional_lstm_forward(tape, d.seq_fwd,
                                                      d.seq_bwd, xs);
  NodeId h = tape.input(Tensor({m, cfg.d_lstm}));
  NodeId c = tape.input(Tensor({m, cfg.d_lstm}));
  for (std::size_t step = 0; step < cfg.seq_len; ++step) {
    auto [hn, cn] = lstm_cell_step(tape, d.seq_top, bi[step], h, c);
    h = hn;
    c = cn;
  }

  NodeId merged = tape.concat_cols({t, h});
  NodeId logit = dense_forward(tape, d.merge, merged);
  DiscriminatorOut out;
  out.logit = logit;
  out.score = wasserstein ? logit : tape.sigmoid(logit);
  return out;
}

}  // namespace tripsynth::nets
