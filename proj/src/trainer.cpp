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

#include "tripsynth/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "tripsynth/autodiff.hpp"
#include "tripsynth/error.hpp"
#include "tripsynth/kernels.hpp"

namespace tripsynth::train {
namespace {

// Stream purposes. Every draw in the loop belongs to one (tag, counter)
// substream of cfg.seed, so resuming at step s replays the same streams.
constexpr std::uint64_t kTagInit = 1;
constexpr std::uint64_t kTagShuffle = 2;  // counter = epoch
constexpr std::uint64_t kTagDiscZ = 3;    // counter = disc update index
constexpr std::uint64_t kTagNoise = 4;    // counter = disc update index
constexpr std::uint64_t kTagGenZ = 5;     // counter = step
constexpr std::uint64_t kTagSample = 6;   // counter = chunk

constexpr std::size_t kSampleChunk = 256;

std::vector<std::size_t> permutation(std::size_t n, SeededRng rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t j = rng.next_below(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

void check_compatible(const data::Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (ds.agents.empty()) throw ValueError("dataset is empty");
  if (ds.agents.size() < cfg.batch) {
    throw ValueError("dataset of " + std::to_string(ds.agents.size()) +
                     " agents is smaller than one batch of " +
                     std::to_string(cfg.batch));
  }
  const auto expect = ds.codec.head_specs();
  if (cfg.net.heads.size() != expect.size()) {
    throw ValueError("net head count does not match the codec");
  }
  for (std::size_t i = 0; i < expect.size(); ++i) {
    if (cfg.net.heads[i].name != expect[i].name ||
        cfg.net.heads[i].categorical != expect[i].categorical ||
        cfg.net.heads[i].width != expect[i].width) {
      throw ValueError("net head " + cfg.net.heads[i].name +
                       " disagrees with the codec layout");
    }
  }
  if (cfg.net.g2_out != 5) {
    throw ValueError("sequence branch must emit 5 features per timestep");
  }
  if (cfg.net.seq_len != ds.codec.max_seq()) {
    throw ValueError("net seq_len " + std::to_string(cfg.net.seq_len) +
                     " does not match the codec padding " +
                     std::to_string(ds.codec.max_seq()));
  }
}

// Rows `rows` of the dataset gathered into [m, W] and [m, T, 5] batches.
void gather_batch(const data::Dataset& ds, const std::vector<std::size_t>& rows,
                  Tensor& tab, Tensor& seq) {
  const std::size_t m = rows.size();
  const std::size_t w = ds.agents.front().tab.size();
  const std::size_t T = ds.agents.front().seq.shape[0];
  tab = Tensor({m, w});
  seq = Tensor({m, T, 5});
  for (std::size_t i = 0; i < m; ++i) {
    const data::EncodedAgent& a = ds.agents[rows[i]];
    for (std::size_t j = 0; j < w; ++j) tab(i, j) = a.tab(j);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < 5; ++j) seq(i, t, j) = a.seq(t, j);
    }
  }
}

// Generator forward with frozen parameters; returns materialized outputs.
void generate_fake(const Checkpoint& st, const Tensor& z, Tensor& tab,
                   Tensor& seq) {
  autodiff::Tape tape;
  const nets::BoundGenerator bg =
      nets::bind_generator(tape, st.gen, nets::ParamMode::kFrozen, 0);
  const autodiff::NodeId zn = tape.input(z);
  const nets::GeneratorOut out = nets::generator_forward(tape, bg, st.cfg.net, zn);
  tab = tape.value(out.tab);
  seq = tape.value(out.seq);
}

Tensor slice_row_tab(const Tensor& tab, std::size_t i) {
  const std::size_t w = tab.shape[1];
  Tensor out({std::size_t{1}, w});
  for (std::size_t j = 0; j < w; ++j) out(0, j) = tab(i, j);
  return out;
}

Tensor slice_row_seq(const Tensor& seq, std::size_t i) {
  const std::size_t T = seq.shape[1];
  const std::size_t d = seq.shape[2];
  Tensor out({std::size_t{1}, T, d});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < d; ++j) out(0, t, j) = seq(i, t, j);
  }
  return out;
}

// One discriminator update over a real batch paired with a fake batch.
// Per-example losses and gradients are formed example by example (real_i
// against fake_i), then clipped/noised/averaged by the DP aggregator.
optim::StepStats disc_update(Checkpoint& st, const Tensor& real_tab,
                             const Tensor& real_seq, const Tensor& fake_tab,
                             const Tensor& fake_seq, SeededRng noise_rng,
                             double& d_loss) {
  const TrainConfig& cfg = st.cfg;
  const std::size_t m = real_tab.shape[0];
  std::vector<std::vector<Tensor>> per_example;
  per_example.reserve(m);
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    autodiff::Tape tape;
    const nets::BoundDiscriminator bd =
        nets::bind_discriminator(tape, st.disc, nets::ParamMode::kTracked, 0);
    const autodiff::NodeId rt = tape.input(slice_row_tab(real_tab, i));
    const autodiff::NodeId rs = tape.input(slice_row_seq(real_seq, i));
    const autodiff::NodeId ft = tape.input(slice_row_tab(fake_tab, i));
    const autodiff::NodeId fs = tape.input(slice_row_seq(fake_seq, i));
    const nets::DiscriminatorOut real_out =
        nets::discriminator_forward(tape, bd, cfg.net, rt, rs, cfg.wasserstein);
    const nets::DiscriminatorOut fake_out =
        nets::discriminator_forward(tape, bd, cfg.net, ft, fs, cfg.wasserstein);
    autodiff::NodeId loss;
    if (cfg.wasserstein) {
      loss = tape.sub(tape.sum_all(fake_out.logit),
                      tape.sum_all(real_out.logit));
    } else {
      const autodiff::NodeId real_term =
          tape.sum_all(tape.softplus(tape.affine(real_out.logit, -1.0, 0.0)));
      const autodiff::NodeId fake_term =
          tape.sum_all(tape.softplus(fake_out.logit));
      loss = tape.add(real_term, fake_term);
    }
    loss_sum += tape.value(loss).data[0];
    per_example.push_back(tape.backward(loss));
  }
  d_loss = loss_sum / static_cast<double>(m);

  optim::DpSgdState sgd;
  sgd.lr = cfg.lr_d;
  sgd.privacy = cfg.privacy;
  const optim::StepStats stats = optim::dp_discriminator_step(
      st.disc.tensors(), std::move(per_example), sgd, noise_rng);

  if (cfg.wasserstein) {
    const kernels::KernelTable& K = kernels::table();
    for (Tensor* t : st.disc.tensors()) {
      K.clamp(t->data.data(), -cfg.weight_clip, cfg.weight_clip, t->size());
    }
  }
  return stats;
}

// One generator update: gradients flow through the frozen discriminator
// into the generator only.
double gen_update(Checkpoint& st, const Tensor& z) {
  const TrainConfig& cfg = st.cfg;
  autodiff::Tape tape;
  const nets::BoundGenerator bg =
      nets::bind_generator(tape, st.gen, nets::ParamMode::kTracked, 0);
  const nets::BoundDiscriminator bd =
      nets::bind_discriminator(tape, st.disc, nets::ParamMode::kFrozen, 0);
  const autodiff::NodeId zn = tape.input(z);
  const nets::GeneratorOut g_out = nets::generator_forward(tape, bg, cfg.net, zn);
  const nets::DiscriminatorOut d_out = nets::discriminator_forward(
      tape, bd, cfg.net, g_out.tab, g_out.seq, cfg.wasserstein);
  autodiff::NodeId loss;
  if (cfg.wasserstein) {
    loss = tape.affine(tape.mean_all(d_out.logit), -1.0, 0.0);
  } else {
    // Non-saturating objective: minimize softplus(-logit(fake)).
    loss = tape.mean_all(tape.softplus(tape.affine(d_out.logit, -1.0, 0.0)));
  }
  const double g_loss = tape.value(loss).data[0];
  const std::vector<Tensor> grads = tape.backward(loss);
  optim::rmsprop_step(st.gen.tensors(), grads, st.opt_g);
  return g_loss;
}

TrainResult run_loop(Checkpoint st, const data::Dataset& ds,
                     std::size_t stop_after) {
  const TrainConfig& cfg = st.cfg;
  const std::size_t n = ds.agents.size();
  const std::size_t steps_per_epoch = n / cfg.batch;
  std::size_t total = cfg.epochs * steps_per_epoch;
  if (stop_after > 0 && stop_after < total) total = stop_after;

  const SeededRng root(cfg.seed);
  TrainHistory hist;

  std::size_t cached_epoch = static_cast<std::size_t>(-1);
  std::vector<std::size_t> perm;

  for (std::size_t s = st.step; s < total; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t epoch = s / steps_per_epoch;
    const std::size_t b = s % steps_per_epoch;
    if (epoch != cached_epoch) {
      perm = permutation(n, root.derive(kTagShuffle, epoch));
      cached_epoch = epoch;
    }
    const std::vector<std::size_t> rows(perm.begin() + b * cfg.batch,
                                        perm.begin() + (b + 1) * cfg.batch);
    Tensor real_tab, real_seq;
    gather_batch(ds, rows, real_tab, real_seq);

    double d_loss = 0.0;
    optim::StepStats stats;
    for (std::size_t j = 0; j < cfg.disc_steps; ++j) {
      const std::uint64_t u = s * cfg.disc_steps + j;
      SeededRng zr = root.derive(kTagDiscZ, u);
      const Tensor z =
          gaussian_tensor(zr, {cfg.batch, cfg.net.latent_dim}, 0.0, 1.0);
      Tensor fake_tab, fake_seq;
      generate_fake(st, z, fake_tab, fake_seq);
      stats = disc_update(st, real_tab, real_seq, fake_tab, fake_seq,
                          root.derive(kTagNoise, u), d_loss);
    }

    SeededRng zr = root.derive(kTagGenZ, s);
    const Tensor z =
        gaussian_tensor(zr, {cfg.batch, cfg.net.latent_dim}, 0.0, 1.0);
    const double g_loss = gen_update(st, z);

    if (!std::isfinite(d_loss) || !std::isfinite(g_loss)) {
      throw TrainingError("loss is not finite (d=" +
                              data::format_double(d_loss) + ", g=" +
                              data::format_double(g_loss) + ")",
                          s);
    }

    const auto t1 = std::chrono::steady_clock::now();
    StepRecord rec;
    rec.step = s;
    rec.d_loss = d_loss;
    rec.g_loss = g_loss;
    rec.preclip_mean = stats.preclip_mean;
    rec.preclip_max = stats.preclip_max;
    rec.millis =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    hist.steps.push_back(rec);
    st.step = s + 1;
  }
  return {std::move(st), std::move(hist)};
}

}  // namespace

void TrainHistory::save_csv(const std::filesystem::path& path) const {
  std::ostringstream out;
  out << "step,d_loss,g_loss,preclip_mean,preclip_max,millis\n";
  for (const StepRecord& r : steps) {
    out << r.step << ',' << data::format_double(r.d_loss) << ','
        << data::format_double(r.g_loss) << ','
        << data::format_double(r.preclip_mean) << ','
        << data::format_double(r.preclip_max) << ',' << r.millis << '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::string s = out.str();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw IoError("short write to " + path.string());
}

TrainResult train(const data::Dataset& ds, const TrainConfig& cfg,
                  std::size_t stop_after) {
  check_compatible(ds, cfg);
  Checkpoint st;
  st.cfg = cfg;
  st.codec = ds.codec;
  SeededRng init_rng = SeededRng(cfg.seed).derive(kTagInit, 0);
  auto [gen, disc] = nets::init_params(cfg.net, init_rng);
  st.gen = std::move(gen);
  st.disc = std::move(disc);
  st.opt_g = optim::RmspropState::init(std::as_const(st.gen).tensors(),
                                       cfg.lr_g, cfg.rho, cfg.eps);
  st.step = 0;
  return run_loop(std::move(st), ds, stop_after);
}

TrainResult resume(const Checkpoint& start, const data::Dataset& ds,
                   std::size_t stop_after) {
  check_compatible(ds, start.cfg);
  return run_loop(start, ds, stop_after);
}

std::vector<data::EncodedAgent> sample_encoded(const Checkpoint& c,
                                               std::size_t n,
                                               std::uint64_t seed) {
  if (n == 0) throw ValueError("sample count must be at least 1");
  const SeededRng root(seed);
  std::vector<data::EncodedAgent> out;
  out.reserve(n);
  const std::size_t T = c.cfg.net.seq_len;
  for (std::size_t chunk = 0; out.size() < n; ++chunk) {
    const std::size_t m = std::min(kSampleChunk, n - out.size());
    SeededRng zr = root.derive(kTagSample, chunk);
    const Tensor z = gaussian_tensor(zr, {m, c.cfg.net.latent_dim}, 0.0, 1.0);
    Tensor tab, seq;
    generate_fake(c, z, tab, seq);
    for (std::size_t i = 0; i < m; ++i) {
      data::EncodedAgent a;
      a.tab = Tensor({tab.shape[1]});
      for (std::size_t j = 0; j < tab.shape[1]; ++j) a.tab(j) = tab(i, j);
      a.seq = slice_row_seq(seq, i);
      a.seq.shape = {T, std::size_t{5}};
      a.seq_len = c.codec.infer_seq_len(a.seq);
      // Restore the padding convention beyond the inferred length.
      for (std::size_t t = a.seq_len; t < T; ++t) {
        for (std::size_t j = 0; j < 5; ++j) a.seq(t, j) = 0.0;
      }
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::vector<data::RawRecord> sample_agents(const Checkpoint& c, std::size_t n,
                                           std::uint64_t seed) {
  const std::vector<data::EncodedAgent> enc = sample_encoded(c, n, seed);
  std::vector<data::RawRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < enc.size(); ++i) {
    data::RawRecord r = c.codec.decode(enc[i]);
    r.id = "s" + std::to_string(i + 1);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> discriminator_scores(
    const Checkpoint& c, const std::vector<data::EncodedAgent>& agents) {
  std::vector<double> scores;
  scores.reserve(agents.size());
  const std::size_t T = c.cfg.net.seq_len;
  for (const data::EncodedAgent& a : agents) {
    if (a.tab.size() != c.codec.tab_width() || a.seq.shape[0] != T) {
      throw ShapeError("agent encoding does not match the checkpoint codec");
    }
    autodiff::Tape tape;
    const nets::BoundDiscriminator bd =
        nets::bind_discriminator(tape, c.disc, nets::ParamMode::kFrozen, 0);
    Tensor tab({std::size_t{1}, a.tab.size()});
    for (std::size_t j = 0; j < a.tab.size(); ++j) tab(0, j) = a.tab(j);
    Tensor seq({std::size_t{1}, T, std::size_t{5}});
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < 5; ++j) seq(0, t, j) = a.seq(t, j);
    }
    const nets::DiscriminatorOut out = nets::discriminator_forward(
        tape, bd, c.cfg.net, tape.input(std::move(tab)),
        tape.input(std::move(seq)), c.cfg.wasserstein);
    scores.push_back(tape.value(out.score).data[0]);
  }
  return scores;
}

}  // namespace tripsynth::train
