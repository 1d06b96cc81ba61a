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

// Release gate. Each criterion prints exactly one PASS/FAIL line with the
// measured value next to its limit, and the process exits nonzero if any
// criterion fails. Every reference quantity here is computed independently
// of the library path under test: finite differences for gradients, a
// cyclic Jacobi solver for eigenpairs, closed-form histogram oracles.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "tripsynth/attack.hpp"
#include "tripsynth/autodiff.hpp"
#include "tripsynth/data.hpp"
#include "tripsynth/error.hpp"
#include "tripsynth/eval.hpp"
#include "tripsynth/fixture.hpp"
#include "tripsynth/nets.hpp"
#include "tripsynth/optim.hpp"
#include "tripsynth/rng.hpp"
#include "tripsynth/tensor.hpp"
#include "tripsynth/trainer.hpp"

namespace fs = std::filesystem;
namespace autodiff = tripsynth::autodiff;
namespace data = tripsynth::data;
namespace eval = tripsynth::eval;
namespace nets = tripsynth::nets;
namespace optim = tripsynth::optim;
namespace train = tripsynth::train;
namespace attack = tripsynth::attack;
using tripsynth::SeededRng;
using tripsynth::Tensor;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s - %s\n", id, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() /
                     ("tripsynth_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(f),
                           std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// criterion 1: analytic gradients against central differences

struct GradCheck {
  double worst = 0.0;
  std::size_t coords = 0;
};

// build must be a pure function of the tape and the parameter nodes, so the
// same callable serves both the analytic pass and the perturbed re-evals.
template <typename BuildFn>
void fd_check(const std::vector<Tensor>& params, BuildFn build,
              GradCheck& gc) {
  autodiff::Tape tape;
  std::vector<autodiff::NodeId> ids;
  ids.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    ids.push_back(tape.param(i, params[i]));
  }
  const autodiff::NodeId loss = build(tape, ids);
  const std::vector<Tensor> grads = tape.backward(loss);

  const double h = 1e-5;
  for (std::size_t ti = 0; ti < params.size(); ++ti) {
    for (std::size_t j = 0; j < params[ti].data.size(); ++j) {
      const auto eval_at = [&](double delta) {
        std::vector<Tensor> p = params;
        p[ti].data[j] += delta;
        autodiff::Tape t2;
        std::vector<autodiff::NodeId> in2;
        in2.reserve(p.size());
        for (const Tensor& q : p) in2.push_back(t2.input(q));
        return t2.value(build(t2, in2)).data[0];
      };
      const double fd = (eval_at(h) - eval_at(-h)) / (2.0 * h);
      const double ana = grads[ti].data[j];
      const double rel = std::abs(fd - ana) /
                         std::max({std::abs(fd), std::abs(ana), 1e-6});
      gc.worst = std::max(gc.worst, rel);
      ++gc.coords;
    }
  }
}

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const SeededRng master(2024);
  GradCheck gc;

  for (std::size_t k = 0; k < 10; ++k) {
    SeededRng rng = master.derive(1, k);
    const std::size_t m = 1 + rng.next_below(4);
    const std::size_t in = 1 + rng.next_below(8);
    const std::size_t out = 1 + rng.next_below(8);
    const Tensor x = uniform_tensor(rng, {m, in}, -1.0, 1.0);
    const std::vector<Tensor> params = {
        uniform_tensor(rng, {in, out}, -0.8, 0.8),
        uniform_tensor(rng, {out}, -0.5, 0.5)};
    fd_check(params,
             [&x](autodiff::Tape& t, const std::vector<autodiff::NodeId>& p) {
               const auto y = t.tanh(t.add_rowvec(t.matmul(t.input(x), p[0]),
                                                  p[1]));
               return t.sum_all(t.mul(y, y));
             },
             gc);
  }

  for (std::size_t k = 0; k < 10; ++k) {
    SeededRng rng = master.derive(2, k);
    const std::size_t m = 1 + rng.next_below(4);
    const std::size_t in = 1 + rng.next_below(8);
    const std::size_t out = 2 + rng.next_below(7);
    const Tensor x = uniform_tensor(rng, {m, in}, -1.0, 1.0);
    const Tensor c = uniform_tensor(rng, {m, out}, -1.0, 1.0);
    const std::vector<Tensor> params = {
        uniform_tensor(rng, {in, out}, -0.8, 0.8),
        uniform_tensor(rng, {out}, -0.5, 0.5)};
    fd_check(params,
             [&x, &c](autodiff::Tape& t,
                      const std::vector<autodiff::NodeId>& p) {
               const auto z = t.add_rowvec(t.matmul(t.input(x), p[0]), p[1]);
               return t.sum_all(t.mul(t.softmax(z), t.input(c)));
             },
             gc);
  }

  for (std::size_t k = 0; k < 10; ++k) {
    SeededRng rng = master.derive(3, k);
    const std::size_t m = 1 + rng.next_below(3);
    const std::size_t d = 1 + rng.next_below(6);
    const std::size_t hd = 1 + rng.next_below(6);
    const Tensor x1 = uniform_tensor(rng, {m, d}, -1.0, 1.0);
    const Tensor x2 = uniform_tensor(rng, {m, d}, -1.0, 1.0);
    const Tensor h0 = uniform_tensor(rng, {m, hd}, -0.5, 0.5);
    const Tensor c0 = uniform_tensor(rng, {m, hd}, -0.5, 0.5);
    std::vector<Tensor> params;
    for (int i = 0; i < 4; ++i) {
      params.push_back(uniform_tensor(rng, {d, hd}, -0.6, 0.6));
    }
    for (int i = 0; i < 4; ++i) {
      params.push_back(uniform_tensor(rng, {hd, hd}, -0.6, 0.6));
    }
    for (int i = 0; i < 4; ++i) {
      params.push_back(uniform_tensor(rng, {hd}, -0.3, 0.3));
    }
    fd_check(params,
             [&](autodiff::Tape& t, const std::vector<autodiff::NodeId>& p) {
               const nets::BoundLstm cell{p[0], p[1], p[2], p[3], p[4], p[5],
                                          p[6], p[7], p[8], p[9], p[10],
                                          p[11]};
               auto [h1, c1] = nets::lstm_cell_step(t, cell, t.input(x1),
                                                    t.input(h0), t.input(c0));
               auto [h2, c2] = nets::lstm_cell_step(t, cell, t.input(x2), h1,
                                                    c1);
               (void)c2;
               return t.sum_all(t.mul(h2, h2));
             },
             gc);
  }

  const double elapsed = seconds_since(t0);
  const bool pass = gc.worst < 1e-4 && elapsed < 10.0;
  report(1, pass,
         "gradient check, dense/softmax-head/lstm-cell x10 each: max rel err " +
             num(gc.worst) + " over " + std::to_string(gc.coords) +
             " coordinates (limit 1e-04), " + num(elapsed) + "s (limit 10s)");
}

// ---------------------------------------------------------------------------
// criterion 2: differential privacy mechanics

std::vector<Tensor> random_grads(SeededRng& rng) {
  return {uniform_tensor(rng, {7, 3}, -1.0, 1.0),
          uniform_tensor(rng, {5}, -1.0, 1.0)};
}

void criterion_dp_mechanics() {
  const auto t0 = std::chrono::steady_clock::now();
  SeededRng rng(5150);

  // (a) every clipped example lands at or under the bound.
  double max_post = 0.0;
  std::size_t bound_hits = 0;
  for (int i = 0; i < 32; ++i) {
    std::vector<Tensor> g = random_grads(rng);
    const double pre = optim::clip_per_example(g, 1.0);
    if (pre > 1.0) ++bound_hits;
    max_post = std::max(max_post, optim::global_norm(g));
  }
  const bool clip_ok = max_post <= 1.0 + 1e-9 && bound_hits > 0;

  // (b) sigma=0 with a non-binding bound reproduces the plain minibatch
  // mean, and consumes no noise draws.
  std::vector<std::vector<Tensor>> batch;
  for (int i = 0; i < 8; ++i) batch.push_back(random_grads(rng));
  optim::PrivacyConfig quiet;
  quiet.enabled = true;
  quiet.noise_multiplier = 0.0;
  quiet.clip_norm = 1e9;
  SeededRng noise_rng(77);
  const std::vector<Tensor> agg = optim::privatize_sum(batch, quiet, noise_rng);
  double mean_dev = 0.0;
  for (std::size_t ti = 0; ti < agg.size(); ++ti) {
    for (std::size_t j = 0; j < agg[ti].data.size(); ++j) {
      double s = 0.0;
      for (const std::vector<Tensor>& ex : batch) s += ex[ti].data[j];
      mean_dev = std::max(mean_dev, std::abs(agg[ti].data[j] - s / 8.0));
    }
  }
  const bool mean_ok = mean_dev <= 1e-12 && noise_rng.counter() == 0;

  // (c) the injected noise is N(0, (sigma C)^2): empirical sd within 2%.
  const std::size_t n_coords = 120000;
  std::vector<std::vector<Tensor>> zero_batch;
  zero_batch.push_back({Tensor::zeros({n_coords})});
  optim::PrivacyConfig noisy;
  noisy.enabled = true;
  noisy.noise_multiplier = 2.0;
  noisy.clip_norm = 1.5;
  SeededRng noise_rng2(99);
  const std::vector<Tensor> noised =
      optim::privatize_sum(zero_batch, noisy, noise_rng2);
  double sum = 0.0;
  for (double v : noised[0].data) sum += v;
  const double mean = sum / static_cast<double>(n_coords);
  double ss = 0.0;
  for (double v : noised[0].data) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n_coords));
  const double target = 2.0 * 1.5;
  const bool noise_ok = std::abs(sd / target - 1.0) <= 0.02;

  const double elapsed = seconds_since(t0);
  const bool pass = clip_ok && mean_ok && noise_ok && elapsed < 30.0;
  report(2, pass,
         "dp mechanics: max post-clip norm " + num(max_post) +
             " (limit 1+1e-9), sigma=0 mean deviation " + num(mean_dev) +
             " (limit 1e-12), noise sd " + num(sd) + " vs sigma*C " +
             num(target) + " (tolerance 2%), " + num(elapsed) +
             "s (limit 30s)");
}

// ---------------------------------------------------------------------------
// criterion 3: codec round trip at survey scale

void criterion_codec_roundtrip() {
  const auto t0 = std::chrono::steady_clock::now();
  const data::SurveySchema schema = data::standard_schema();
  const std::vector<data::RawRecord> records = data::synth_fixture(7, 10000);
  const data::Codec codec = data::Codec::fit(records, schema);

  const auto range_of = [&schema](const std::string& name) {
    const data::VariableSpec* v = schema.find(name);
    return v->max - v->min;
  };
  const std::vector<const data::VariableSpec*> person = schema.person_vars();
  const double ox_r = range_of("D_ORIXCOOR");
  const double oy_r = range_of("D_ORIYCOOR");
  const double dx_r = range_of("D_DESXCOOR");
  const double dy_r = range_of("D_DESYCOOR");

  std::size_t mismatches = 0;
  double worst_rel = 0.0;
  const auto check_num = [&](double got, double want, double range) {
    const double rel = std::abs(got - want) / range;
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-9) ++mismatches;
  };

  for (const data::RawRecord& r : records) {
    const data::RawRecord back = codec.decode(codec.encode(r));
    for (std::size_t i = 0; i < person.size(); ++i) {
      if (person[i]->is_label_kind()) {
        if (std::get<std::string>(back.person[i]) !=
            std::get<std::string>(r.person[i])) {
          ++mismatches;
        }
      } else {
        check_num(std::get<double>(back.person[i]),
                  std::get<double>(r.person[i]),
                  person[i]->max - person[i]->min);
      }
    }
    if (back.trips.size() != r.trips.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t ti = 0; ti < r.trips.size(); ++ti) {
      if (back.trips[ti].purpose != r.trips[ti].purpose) ++mismatches;
      check_num(back.trips[ti].ox, r.trips[ti].ox, ox_r);
      check_num(back.trips[ti].oy, r.trips[ti].oy, oy_r);
      check_num(back.trips[ti].dx, r.trips[ti].dx, dx_r);
      check_num(back.trips[ti].dy, r.trips[ti].dy, dy_r);
    }
  }

  const double elapsed = seconds_since(t0);
  const bool pass = mismatches == 0 && elapsed < 10.0;
  report(3, pass,
         "codec round trip over 10000 persons: " +
             std::to_string(mismatches) +
             " mismatches, worst numeric deviation " + num(worst_rel) +
             " of range (limit 1e-09), " + num(elapsed) + "s (limit 10s)");
}

// ---------------------------------------------------------------------------
// criterion 4: srmse closed-form oracles

eval::Histogram two_bin(double a, double b) {
  eval::Histogram h;
  h.variables = {"v"};
  h.labels = {"a", "b"};
  h.probs = {a, b};
  h.counts = {a * 100.0, b * 100.0};
  h.valid = {true, true};
  h.total = 100.0;
  return h;
}

void criterion_srmse_oracles() {
  const double z = eval::srmse(two_bin(0.3, 0.7), two_bin(0.3, 0.7)).srmse;
  // diffs +-0.1 over two bins: sqrt(0.02/2) / 0.5 = 0.2.
  const double s1 = eval::srmse(two_bin(0.6, 0.4), two_bin(0.5, 0.5)).srmse;
  // disjoint point masses: sqrt(2/2) / 0.5 = 2.
  const double s2 = eval::srmse(two_bin(1.0, 0.0), two_bin(0.0, 1.0)).srmse;
  const double worst = std::max(
      {std::abs(z), std::abs(s1 - 0.2), std::abs(s2 - 2.0)});
  report(4, worst <= 1e-12,
         "srmse oracles 0 / 0.2 / 2.0: measured " + num(z) + " / " + num(s1) +
             " / " + num(s2) + ", worst deviation " + num(worst) +
             " (limit 1e-12)");
}

// ---------------------------------------------------------------------------
// criterion 5: pca against an independent eigensolver

struct EigenPairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};

// Cyclic Jacobi on a symmetric matrix; shares no code with the library's
// eigensolver path.
EigenPairs jacobi_eigen(std::vector<std::vector<double>> a) {
  const std::size_t d = a.size();
  std::vector<std::vector<double>> v(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < d; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double vip = v[i][p], viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&a](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenPairs out;
  for (std::size_t r = 0; r < d; ++r) {
    out.values.push_back(a[order[r]][order[r]]);
    std::vector<double> vec(d);
    for (std::size_t i = 0; i < d; ++i) vec[i] = v[i][order[r]];
    out.vectors.push_back(vec);
  }
  return out;
}

void criterion_pca() {
  const data::SurveySchema schema = data::toy_schema();
  const std::vector<data::RawRecord> records = data::toy_fixture(21, 160);
  const data::Codec codec = data::Codec::fit(records, schema, data::kToyMaxSeq);
  const data::Dataset ds =
      data::Dataset::encode_all(records, codec, "acceptance pca");
  const std::size_t k = 3;
  const eval::PcaResult res = eval::pca(ds.agents, codec, k);

  // Reference correlation matrix from the documented standardization rule:
  // sample (n-1) variance, exact zero-variance columns dropped.
  const std::size_t n = ds.agents.size();
  const std::size_t width = codec.tab_width();
  std::vector<std::size_t> kept;
  std::vector<double> mu(width, 0.0), sd(width, 0.0);
  for (std::size_t j = 0; j < width; ++j) {
    for (std::size_t i = 0; i < n; ++i) mu[j] += ds.agents[i].tab.data[j];
    mu[j] /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = ds.agents[i].tab.data[j] - mu[j];
      ss += c * c;
    }
    const double var = ss / static_cast<double>(n - 1);
    if (var > 0.0) {
      kept.push_back(j);
      sd[j] = std::sqrt(var);
    }
  }
  const std::size_t dk = kept.size();
  std::vector<std::vector<double>> corr(dk, std::vector<double>(dk, 0.0));
  for (std::size_t a = 0; a < dk; ++a) {
    for (std::size_t b = 0; b < dk; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double za =
            (ds.agents[i].tab.data[kept[a]] - mu[kept[a]]) / sd[kept[a]];
        const double zb =
            (ds.agents[i].tab.data[kept[b]] - mu[kept[b]]) / sd[kept[b]];
        s += za * zb;
      }
      corr[a][b] = s / static_cast<double>(n - 1);
    }
  }
  const EigenPairs ref = jacobi_eigen(corr);

  bool ok = res.columns.size() == dk && res.components.shape[1] == dk;
  double worst_cos = 0.0;
  for (std::size_t i = 0; i < k && ok; ++i) {
    // Skip directions whose eigenvalue is nearly degenerate with a
    // neighbor; the subspace is well defined but individual vectors spin.
    double gap = 1e300;
    if (i > 0) gap = std::min(gap, std::abs(ref.values[i - 1] - ref.values[i]));
    if (i + 1 < ref.values.size()) {
      gap = std::min(gap, std::abs(ref.values[i] - ref.values[i + 1]));
    }
    if (gap / std::max(1.0, std::abs(ref.values[0])) < 1e-6) continue;
    double dot = 0.0, nn = 0.0;
    for (std::size_t j = 0; j < dk; ++j) {
      dot += res.components(i, j) * ref.vectors[i][j];
      nn += ref.vectors[i][j] * ref.vectors[i][j];
    }
    const double cosv = std::abs(dot) / std::sqrt(nn);
    worst_cos = std::max(worst_cos, std::abs(1.0 - cosv));
  }
  ok = ok && worst_cos <= 1e-6;

  double worst_orth = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t col = 0; col < dk; ++col) {
        dot += res.components(i, col) * res.components(j, col);
      }
      worst_orth =
          std::max(worst_orth, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  ok = ok && worst_orth <= 1e-9;

  // Degenerate scenario: two perfectly correlated kept columns must put
  // the whole trace on the first component.
  std::vector<data::RawRecord> flat;
  for (std::size_t i = 0; i < 20; ++i) {
    data::RawRecord r;
    r.id = "c" + std::to_string(i + 1);
    const double hx = -100.0 + 200.0 * static_cast<double>(i) / 19.0;
    r.person = {std::string("red"), std::string("small"),
                std::string("circle"), hx, hx};
    r.trips.push_back({hx, hx, hx + 1000.0, hx, "out"});
    r.trips.push_back({hx + 1000.0, hx, hx, hx, "home"});
    flat.push_back(r);
  }
  const data::Codec codec2 = data::Codec::fit(flat, schema, data::kToyMaxSeq);
  const data::Dataset ds2 =
      data::Dataset::encode_all(flat, codec2, "acceptance pca degenerate");
  const eval::PcaResult res2 = eval::pca(ds2.agents, codec2, 1);
  const double explained_dev =
      res2.explained.empty() ? 1.0 : std::abs(res2.explained[0] - 1.0);
  ok = ok && explained_dev <= 1e-9;

  report(5, ok,
         "pca vs cyclic jacobi: worst |1-|cos|| " + num(worst_cos) +
             " (limit 1e-06), orthonormality deviation " + num(worst_orth) +
             " (limit 1e-09), rank-1 explained ratio off by " +
             num(explained_dev) + " (limit 1e-09)");
}

// ---------------------------------------------------------------------------
// criteria 6-8 share small training runs on the toy survey

train::TrainConfig fidelity_config(const data::Codec& codec,
                                   std::uint64_t seed) {
  train::TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch = 100;
  cfg.seed = 100 + seed;
  // The discriminator takes plain SGD steps while the generator uses RMSProp,
  // whose normalized updates move much farther per step at equal rates. The
  // raised lr_d keeps the two sides paced so the generator gets a usable
  // signal instead of stalling at the uninformative equilibrium.
  cfg.lr_d = 0.04;
  cfg.lr_g = 2e-3;
  cfg.privacy.enabled = false;
  cfg.net.latent_dim = 32;
  cfg.net.trunk_width = 64;
  cfg.net.g2_stack = {64};
  cfg.net.g2_out = 5;
  cfg.net.d_tab_stack = {64};
  cfg.net.d_bilstm = 32;
  cfg.net.d_lstm = 16;
  cfg.net.seq_len = codec.max_seq();
  cfg.net.heads = codec.head_specs();
  return cfg;
}

struct FidelityOutcome {
  double worst = 0.0;
  double mean = 0.0;
  std::string worst_var;
};

FidelityOutcome toy_fidelity(std::uint64_t seed, bool private_run) {
  const data::SurveySchema schema = data::toy_schema();
  const std::vector<data::RawRecord> records = data::toy_fixture(seed, 2000);
  const data::Codec codec = data::Codec::fit(records, schema, data::kToyMaxSeq);
  const data::Dataset ds =
      data::Dataset::encode_all(records, codec, "acceptance fidelity");

  train::TrainConfig cfg = fidelity_config(codec, seed);
  if (private_run) {
    cfg.privacy.enabled = true;
    cfg.privacy.noise_multiplier = 2.0;
    cfg.privacy.clip_norm = 1.0;
  }
  const train::TrainResult r = train::train(ds, cfg);
  const std::vector<data::RawRecord> synth =
      train::sample_agents(r.state, 2000, 900 + seed);

  // Reference marginals come from the fixture's analytic law, not from the
  // sampled records, so the target is the true distribution.
  const nlohmann::ordered_json truth = data::toy_truth();
  FidelityOutcome out;
  std::size_t n_vars = 0;
  for (const auto& [var, probs] : truth["marginals"].items()) {
    const eval::Histogram est = eval::marginal(synth, schema, var);
    eval::Histogram ref = est;
    for (std::size_t i = 0; i < ref.labels.size(); ++i) {
      const double p = probs.value(ref.labels[i], 0.0);
      ref.probs[i] = p;
      ref.counts[i] = p;
      ref.valid[i] = true;
    }
    const double s = eval::srmse(est, ref).srmse;
    out.mean += s;
    if (s > out.worst) {
      out.worst = s;
      out.worst_var = var;
    }
    ++n_vars;
  }
  out.mean /= static_cast<double>(n_vars);
  return out;
}

std::vector<double> g_sigma0_means;  // per seed, filled by criterion 6

void criterion_toy_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  g_sigma0_means.assign(3, -1.0);
  int passed = 0;
  std::string parts;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const FidelityOutcome out = toy_fidelity(s, false);
    g_sigma0_means[s - 1] = out.mean;
    const bool ok = out.worst < 0.5;
    if (ok) ++passed;
    parts += (parts.empty() ? "" : ", ") + std::string("seed ") +
             std::to_string(s) + " worst " + num(out.worst) + " (" +
             out.worst_var + ")";
  }
  const double elapsed = seconds_since(t0);
  const bool pass = passed >= 2 && elapsed <= 300.0;
  report(6, pass,
         "toy fidelity without noise, marginal srmse < 0.5 on every "
         "variable: " +
             std::to_string(passed) + "/3 seeds [" + parts + "], " +
             num(elapsed) + "s (limit 300s)");
}

void criterion_noise_degrades() {
  const auto t0 = std::chrono::steady_clock::now();
  if (g_sigma0_means.size() != 3 || g_sigma0_means[0] < 0.0) {
    g_sigma0_means.assign(3, -1.0);
    for (std::uint64_t s = 1; s <= 3; ++s) {
      g_sigma0_means[s - 1] = toy_fidelity(s, false).mean;
    }
  }
  int degraded = 0;
  std::string parts;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const FidelityOutcome noisy = toy_fidelity(s, true);
    const double base = g_sigma0_means[s - 1];
    if (noisy.mean >= base) ++degraded;
    parts += (parts.empty() ? "" : ", ") + std::string("seed ") +
             std::to_string(s) + " " + num(noisy.mean) + " vs " + num(base);
  }
  const double elapsed = seconds_since(t0);
  const bool pass = degraded >= 2 && elapsed <= 900.0;
  report(7, pass,
         "sigma=2 training never beats the noise-free mean marginal srmse: " +
             std::to_string(degraded) + "/3 seeds [" + parts + "], " +
             num(elapsed) + "s (limit 900s)");
}

double mia_auc(std::uint64_t seed, bool private_run) {
  // The standard survey gives each agent distinctive continuous structure
  // (age, home coordinates, variable tour counts) for the discriminator to
  // memorize; the toy fixture is too coarse to separate members reliably.
  const data::SurveySchema schema = data::standard_schema();
  const std::vector<data::RawRecord> records =
      data::synth_fixture(40 + seed, 100);
  const data::Codec codec = data::Codec::fit(records, schema, 8);
  const auto [train_recs, val_recs] = data::split(records, 0.5, seed);

  const data::Dataset train_ds =
      data::Dataset::encode_all(train_recs, codec, "acceptance mia train");
  const data::Dataset val_ds =
      data::Dataset::encode_all(val_recs, codec, "acceptance mia val");

  train::TrainConfig cfg;
  cfg.epochs = 500;  // batch == corpus, so exactly 500 steps
  cfg.batch = 50;
  // Full-corpus batches expose every training record on every step, which
  // is the strongest memorization pressure the step budget allows. The
  // rates keep the SGD discriminator paced against the RMSProp generator.
  cfg.lr_d = 0.1;
  cfg.lr_g = 2e-3;
  cfg.seed = 300 + seed;
  cfg.privacy.enabled = private_run;
  if (private_run) {
    cfg.privacy.noise_multiplier = 1.0;
    cfg.privacy.clip_norm = 1.0;
  }
  cfg.net.latent_dim = 32;
  cfg.net.trunk_width = 64;
  cfg.net.g2_stack = {64};
  cfg.net.g2_out = 5;
  cfg.net.d_tab_stack = {64};
  cfg.net.d_bilstm = 32;
  cfg.net.d_lstm = 16;
  cfg.net.seq_len = codec.max_seq();
  cfg.net.heads = codec.head_specs();

  const train::TrainResult r = train::train(train_ds, cfg);
  return attack::mia_scores(r.state, train_ds.agents, val_ds.agents).auc;
}

void criterion_membership_inference() {
  const auto t0 = std::chrono::steady_clock::now();
  // The two claims are scored separately: the attack succeeds on at least
  // two seeds without privacy, and the sigma=1 run blunts it on at least
  // two seeds. The passing seeds need not coincide.
  int open_passed = 0;
  int dp_passed = 0;
  std::string parts;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const double auc_open = mia_auc(s, false);
    const double auc_dp = mia_auc(s, true);
    if (auc_open >= 0.7) ++open_passed;
    if (auc_dp <= 0.65) ++dp_passed;
    parts += (parts.empty() ? "" : ", ") + std::string("seed ") +
             std::to_string(s) + " open " + num(auc_open) + " dp " +
             num(auc_dp);
  }
  const double elapsed = seconds_since(t0);
  const bool pass = open_passed >= 2 && dp_passed >= 2 && elapsed <= 600.0;
  report(8, pass,
         "membership inference, 50/50 agents, 500 steps: non-private auc >= "
         "0.7 in " +
             std::to_string(open_passed) + "/3 seeds, sigma=1 auc <= 0.65 in " +
             std::to_string(dp_passed) + "/3 seeds [" + parts + "], " +
             num(elapsed) + "s (limit 600s)");
}

// ---------------------------------------------------------------------------
// criterion 9: reproducibility of artifacts

void criterion_determinism() {
  const fs::path dir = scratch_dir();
  const std::vector<data::RawRecord> records = data::toy_fixture(1, 64);
  const data::Codec codec =
      data::Codec::fit(records, data::toy_schema(), data::kToyMaxSeq);
  const data::Dataset ds =
      data::Dataset::encode_all(records, codec, "acceptance determinism");

  train::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch = 16;
  cfg.seed = 11;
  cfg.privacy.enabled = true;
  cfg.privacy.noise_multiplier = 0.7;
  cfg.privacy.clip_norm = 1.0;
  cfg.net.latent_dim = 8;
  cfg.net.trunk_width = 16;
  cfg.net.g2_stack = {16};
  cfg.net.g2_out = 5;
  cfg.net.d_tab_stack = {16};
  cfg.net.d_bilstm = 8;
  cfg.net.d_lstm = 8;
  cfg.net.seq_len = codec.max_seq();
  cfg.net.heads = codec.head_specs();

  const train::TrainResult a = train::train(ds, cfg);
  const train::TrainResult b = train::train(ds, cfg);
  train::save_checkpoint(dir / "a.bin", a.state);
  train::save_checkpoint(dir / "b.bin", b.state);
  const bool rerun_ok = slurp(dir / "a.bin") == slurp(dir / "b.bin");

  const train::TrainResult head = train::train(ds, cfg, 3);
  train::save_checkpoint(dir / "head.bin", head.state);
  const train::Checkpoint loaded = train::load_checkpoint(dir / "head.bin");
  const train::TrainResult tail = train::resume(loaded, ds);
  train::save_checkpoint(dir / "tail.bin", tail.state);
  const bool resume_ok = slurp(dir / "tail.bin") == slurp(dir / "a.bin");

  data::write_diary_csv(dir / "s1.csv", codec.schema(),
                        train::sample_agents(a.state, 64, 5));
  data::write_diary_csv(dir / "s2.csv", codec.schema(),
                        train::sample_agents(b.state, 64, 5));
  const bool sample_ok = slurp(dir / "s1.csv") == slurp(dir / "s2.csv");

  fs::remove_all(dir);
  const bool pass = rerun_ok && resume_ok && sample_ok;
  report(9, pass,
         std::string("determinism: rerun checkpoint bytes ") +
             (rerun_ok ? "identical" : "differ") + ", stop/resume bytes " +
             (resume_ok ? "identical" : "differ") + ", sampled diary bytes " +
             (sample_ok ? "identical" : "differ"));
}

// ---------------------------------------------------------------------------
// criterion 10: fixture age distribution

void criterion_fixture_ages() {
  const data::SurveySchema schema = data::standard_schema();
  const std::vector<data::RawRecord> records = data::synth_fixture(0, 10000);
  const std::size_t idx = schema.person_index("P_AGE");
  double sum = 0.0, lo = 1e300, hi = -1e300;
  for (const data::RawRecord& r : records) {
    const double age = std::get<double>(r.person[idx]);
    sum += age;
    lo = std::min(lo, age);
    hi = std::max(hi, age);
  }
  const double mean = sum / 10000.0;
  double ss = 0.0;
  for (const data::RawRecord& r : records) {
    const double age = std::get<double>(r.person[idx]);
    ss += (age - mean) * (age - mean);
  }
  const double sd = std::sqrt(ss / 9999.0);
  const bool pass = std::abs(mean - 43.0) <= 1.0 && std::abs(sd - 20.0) <= 1.0 &&
                    lo >= 5.0 && hi <= 95.0;
  report(10, pass,
         "fixture ages over 10000 persons: mean " + num(mean) +
             " (43 +- 1), sd " + num(sd) + " (20 +- 1), support [" + num(lo) +
             ", " + num(hi) + "] within [5, 95]");
}

}  // namespace

int main() {
  const auto run = [](int id, void (*fn)()) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, std::string("unhandled error: ") + e.what());
    }
  };
  run(1, criterion_gradients);
  run(2, criterion_dp_mechanics);
  run(3, criterion_codec_roundtrip);
  run(4, criterion_srmse_oracles);
  run(5, criterion_pca);
  run(6, criterion_toy_fidelity);
  run(7, criterion_noise_degrades);
  run(8, criterion_membership_inference);
  run(9, criterion_determinism);
  run(10, criterion_fixture_ages);
  std::printf("acceptance: %d/10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
