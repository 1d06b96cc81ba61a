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

#include <unistd.h>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "doctest.h"
#include "tripsynth/data.hpp"
#include "tripsynth/error.hpp"
#include "tripsynth/fixture.hpp"
#include "tripsynth/trainer.hpp"

namespace fs = std::filesystem;
namespace data = tripsynth::data;
namespace train = tripsynth::train;
using tripsynth::IntegrityError;
using tripsynth::TrainingError;
using tripsynth::ValueError;

namespace {

fs::path temp_dir() {
  const fs::path d =
      fs::temp_directory_path() /
      ("tripsynth_trainer_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

data::Dataset toy_dataset(std::uint64_t seed = 1, std::size_t n = 64) {
  const std::vector<data::RawRecord> recs = data::toy_fixture(seed, n);
  const data::Codec codec =
      data::Codec::fit(recs, data::toy_schema(), data::kToyMaxSeq);
  return data::Dataset::encode_all(recs, codec, "trainer test");
}

train::TrainConfig tiny_config(const data::Dataset& ds) {
  train::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch = 16;
  cfg.seed = 11;
  cfg.privacy.enabled = false;
  cfg.net.latent_dim = 8;
  cfg.net.trunk_width = 16;
  cfg.net.g2_stack = {16};
  cfg.net.g2_out = 5;
  cfg.net.d_tab_stack = {16};
  cfg.net.d_bilstm = 8;
  cfg.net.d_lstm = 8;
  cfg.net.seq_len = ds.codec.max_seq();
  cfg.net.heads = ds.codec.head_specs();
  return cfg;
}

bool params_equal(const std::vector<const tripsynth::Tensor*>& a,
                  const std::vector<const tripsynth::Tensor*>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i]->data != b[i]->data) return false;
  }
  return true;
}

bool checkpoints_equal(const train::Checkpoint& a, const train::Checkpoint& b) {
  const train::Checkpoint& ca = a;
  const train::Checkpoint& cb = b;
  if (ca.step != cb.step) return false;
  if (!params_equal(ca.gen.tensors(), cb.gen.tensors())) return false;
  if (!params_equal(ca.disc.tensors(), cb.disc.tensors())) return false;
  if (ca.opt_g.v.size() != cb.opt_g.v.size()) return false;
  for (std::size_t i = 0; i < ca.opt_g.v.size(); ++i) {
    if (ca.opt_g.v[i].data != cb.opt_g.v[i].data) return false;
  }
  return true;
}

train::Checkpoint zero_checkpoint(const data::Dataset& ds, bool wasserstein) {
  train::TrainConfig cfg = tiny_config(ds);
  cfg.wasserstein = wasserstein;
  train::Checkpoint c;
  c.cfg = cfg;
  c.codec = ds.codec;
  c.gen = tripsynth::nets::build_generator(cfg.net);
  c.disc = tripsynth::nets::build_discriminator(cfg.net);
  c.opt_g = tripsynth::optim::RmspropState::init(
      std::as_const(c.gen).tensors(), cfg.lr_g, cfg.rho, cfg.eps);
  c.step = 0;
  return c;
}

}  // namespace

TEST_CASE("fresh standard-loss run starts near the untrained equilibrium") {
  const data::Dataset ds = toy_dataset();
  const train::TrainConfig cfg = tiny_config(ds);
  const train::TrainResult r = train::train(ds, cfg, 1);
  REQUIRE(r.history.steps.size() == 1);
  // Untrained discriminator: d_loss = 2 log 2 up to initialization noise.
  CHECK(std::abs(r.history.steps[0].d_loss - 2.0 * std::log(2.0)) < 0.35);
  CHECK(r.state.step == 1);
  CHECK(std::isfinite(r.history.steps[0].g_loss));
  CHECK(r.history.steps[0].preclip_max >= r.history.steps[0].preclip_mean);
}

TEST_CASE("training is a pure function of dataset and config") {
  const data::Dataset ds = toy_dataset();
  const train::TrainConfig cfg = tiny_config(ds);
  const train::TrainResult a = train::train(ds, cfg, 4);
  const train::TrainResult b = train::train(ds, cfg, 4);
  CHECK(checkpoints_equal(a.state, b.state));
  REQUIRE(a.history.steps.size() == b.history.steps.size());
  for (std::size_t i = 0; i < a.history.steps.size(); ++i) {
    CHECK(a.history.steps[i].d_loss == b.history.steps[i].d_loss);
    CHECK(a.history.steps[i].g_loss == b.history.steps[i].g_loss);
    CHECK(a.history.steps[i].preclip_mean == b.history.steps[i].preclip_mean);
    CHECK(a.history.steps[i].preclip_max == b.history.steps[i].preclip_max);
  }

  // A different seed must actually change the trajectory.
  train::TrainConfig other = cfg;
  other.seed = 12;
  const train::TrainResult c = train::train(ds, other, 4);
  CHECK_FALSE(checkpoints_equal(a.state, c.state));
}

TEST_CASE("stop, save, reload, resume equals the uninterrupted run") {
  const fs::path dir = temp_dir();
  const data::Dataset ds = toy_dataset();
  const train::TrainConfig cfg = tiny_config(ds);

  const train::TrainResult straight = train::train(ds, cfg, 6);
  const train::TrainResult first = train::train(ds, cfg, 3);
  const fs::path p = dir / "ckpt.bin";
  train::save_checkpoint(p, first.state);
  const train::Checkpoint loaded = train::load_checkpoint(p);
  CHECK(checkpoints_equal(loaded, first.state));
  CHECK(loaded.cfg.seed == cfg.seed);
  CHECK(loaded.codec.to_json() == ds.codec.to_json());

  const train::TrainResult rest = train::resume(loaded, ds, 6);
  CHECK(rest.state.step == 6);
  CHECK(checkpoints_equal(rest.state, straight.state));
  REQUIRE(rest.history.steps.size() == 3);  // steps 3, 4, 5
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rest.history.steps[i].step == i + 3);
    CHECK(rest.history.steps[i].d_loss == straight.history.steps[i + 3].d_loss);
    CHECK(rest.history.steps[i].g_loss == straight.history.steps[i + 3].g_loss);
  }
  fs::remove_all(dir);
}

TEST_CASE("checkpoint files detect corruption") {
  const fs::path dir = temp_dir();
  const data::Dataset ds = toy_dataset();
  const train::TrainResult r = train::train(ds, tiny_config(ds), 2);
  const fs::path p = dir / "ckpt.bin";
  train::save_checkpoint(p, r.state);

  std::ifstream in(p, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  in.close();
  bytes[bytes.size() / 3] = static_cast<char>(bytes[bytes.size() / 3] ^ 0x10);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  CHECK_THROWS_AS(train::load_checkpoint(p), IntegrityError);
  fs::remove_all(dir);
}

TEST_CASE("a diverging run aborts with the failing step") {
  const data::Dataset ds = toy_dataset();
  train::TrainConfig cfg = tiny_config(ds);
  cfg.lr_d = 1e300;
  try {
    train::train(ds, cfg, 8);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("sampling is deterministic and prefix-stable") {
  const data::Dataset ds = toy_dataset();
  const train::TrainResult r = train::train(ds, tiny_config(ds), 2);

  const std::vector<data::RawRecord> s100 = train::sample_agents(r.state, 100, 5);
  const std::vector<data::RawRecord> s100b = train::sample_agents(r.state, 100, 5);
  const std::vector<data::RawRecord> s300 = train::sample_agents(r.state, 300, 5);
  REQUIRE(s100.size() == 100);
  REQUIRE(s300.size() == 300);

  const auto same = [](const data::RawRecord& a, const data::RawRecord& b) {
    if (a.person.size() != b.person.size()) return false;
    for (std::size_t v = 0; v < a.person.size(); ++v) {
      if (a.person[v] != b.person[v]) return false;
    }
    if (a.trips.size() != b.trips.size()) return false;
    for (std::size_t t = 0; t < a.trips.size(); ++t) {
      if (a.trips[t].ox != b.trips[t].ox || a.trips[t].oy != b.trips[t].oy ||
          a.trips[t].dx != b.trips[t].dx || a.trips[t].dy != b.trips[t].dy ||
          a.trips[t].purpose != b.trips[t].purpose) {
        return false;
      }
    }
    return true;
  };
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(same(s100[i], s100b[i]));
    CHECK(same(s100[i], s300[i]));  // longer draws extend, never reshuffle
  }

  // A different seed gives different agents.
  const std::vector<data::RawRecord> other = train::sample_agents(r.state, 100, 6);
  bool all_same = true;
  for (std::size_t i = 0; i < 100; ++i) {
    if (!same(s100[i], other[i])) all_same = false;
  }
  CHECK_FALSE(all_same);
}

TEST_CASE("sampled agents decode inside the schema") {
  const data::Dataset ds = toy_dataset();
  const train::TrainResult r = train::train(ds, tiny_config(ds), 2);
  const data::SurveySchema& s = ds.codec.schema();
  const std::vector<const data::VariableSpec*> pv = s.person_vars();

  for (const data::RawRecord& rec : train::sample_agents(r.state, 50, 9)) {
    REQUIRE(rec.person.size() == pv.size());
    for (std::size_t v = 0; v < pv.size(); ++v) {
      if (pv[v]->is_label_kind()) {
        const std::string& lab = std::get<std::string>(rec.person[v]);
        bool known = false;
        for (const std::string& l : pv[v]->labels) known |= (l == lab);
        CHECK(known);
      } else {
        const double x = std::get<double>(rec.person[v]);
        CHECK(x >= pv[v]->min);
        CHECK(x <= pv[v]->max);
      }
    }
    CHECK(rec.trips.size() >= 2);  // at least 3 visited locations
    for (const data::Trip& t : rec.trips) {
      bool known = false;
      for (const std::string& l : s.find(s.purpose_var)->labels) {
        known |= (l == t.purpose);
      }
      CHECK(known);
    }
  }

  const std::vector<data::EncodedAgent> enc =
      train::sample_encoded(r.state, 7, 9);
  REQUIRE(enc.size() == 7);
  for (const data::EncodedAgent& a : enc) {
    CHECK(a.tab.shape == std::vector<std::size_t>{ds.codec.tab_width()});
    CHECK(a.seq.shape ==
          std::vector<std::size_t>{ds.codec.max_seq(), std::size_t{5}});
    CHECK(a.seq_len >= 3);
    CHECK(a.seq_len <= ds.codec.max_seq());
  }
}

TEST_CASE("an all-zero discriminator scores everything at the fixed point") {
  const data::Dataset ds = toy_dataset();
  const std::vector<data::EncodedAgent> agents(ds.agents.begin(),
                                               ds.agents.begin() + 5);

  const train::Checkpoint standard = zero_checkpoint(ds, false);
  for (double s : train::discriminator_scores(standard, agents)) {
    CHECK(s == 0.5);
  }
  const train::Checkpoint wasserstein = zero_checkpoint(ds, true);
  for (double s : train::discriminator_scores(wasserstein, agents)) {
    CHECK(s == 0.0);
  }
}

TEST_CASE("history CSV has the documented layout") {
  const fs::path dir = temp_dir();
  const data::Dataset ds = toy_dataset();
  const train::TrainResult r = train::train(ds, tiny_config(ds), 3);
  const fs::path p = dir / "history.csv";
  r.history.save_csv(p);

  std::ifstream f(p);
  std::string line;
  REQUIRE(std::getline(f, line));
  CHECK(line == "step,d_loss,g_loss,preclip_mean,preclip_max,millis");
  std::size_t rows = 0;
  while (std::getline(f, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);
  fs::remove_all(dir);
}

TEST_CASE("wasserstein training clamps critic weights") {
  const data::Dataset ds = toy_dataset();
  train::TrainConfig cfg = tiny_config(ds);
  cfg.wasserstein = true;
  cfg.weight_clip = 0.01;
  const train::TrainResult r = train::train(ds, cfg, 3);
  for (const tripsynth::Tensor* t : std::as_const(r.state.disc).tensors()) {
    for (double v : t->data) {
      CHECK(std::abs(v) <= 0.01 + 1e-15);
    }
  }
  for (const train::StepRecord& s : r.history.steps) {
    CHECK(std::isfinite(s.d_loss));
    CHECK(std::isfinite(s.g_loss));
  }
}

TEST_CASE("extra discriminator updates per step run cleanly") {
  const data::Dataset ds = toy_dataset();
  train::TrainConfig cfg = tiny_config(ds);
  cfg.disc_steps = 2;
  const train::TrainResult r = train::train(ds, cfg, 2);
  CHECK(r.state.step == 2);
  CHECK(r.history.steps.size() == 2);

  // More discriminator work changes the outcome relative to disc_steps 1.
  train::TrainConfig base = tiny_config(ds);
  const train::TrainResult rb = train::train(ds, base, 2);
  CHECK_FALSE(checkpoints_equal(r.state, rb.state));
}

TEST_CASE("thread count never changes the arithmetic") {
  const data::Dataset ds = toy_dataset();
  train::TrainConfig one = tiny_config(ds);
  train::TrainConfig two = tiny_config(ds);
  two.threads = 2;
  const train::TrainResult a = train::train(ds, one, 3);
  const train::TrainResult b = train::train(ds, two, 3);
  CHECK(checkpoints_equal(a.state, b.state));
}

TEST_CASE("privacy-enabled training clips and stays finite") {
  const data::Dataset ds = toy_dataset();
  train::TrainConfig cfg = tiny_config(ds);
  cfg.privacy.enabled = true;
  cfg.privacy.noise_multiplier = 1.0;
  cfg.privacy.clip_norm = 1.0;
  const train::TrainResult r = train::train(ds, cfg, 3);
  for (const train::StepRecord& s : r.history.steps) {
    CHECK(std::isfinite(s.d_loss));
    CHECK(s.preclip_mean > 0.0);
  }
  // Same config replays identically, noise included.
  const train::TrainResult r2 = train::train(ds, cfg, 3);
  CHECK(checkpoints_equal(r.state, r2.state));
}

TEST_CASE("config validation rejects corrupt settings") {
  const data::Dataset ds = toy_dataset();
  train::TrainConfig cfg = tiny_config(ds);
  cfg.batch = 0;
  CHECK_THROWS_AS(cfg.validate(), ValueError);
  cfg = tiny_config(ds);
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ValueError);
  cfg = tiny_config(ds);
  cfg.lr_d = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValueError);
  cfg = tiny_config(ds);
  cfg.wasserstein = true;
  cfg.weight_clip = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValueError);
  cfg = tiny_config(ds);
  CHECK_NOTHROW(cfg.validate());

  // Batch larger than the corpus cannot make a single step.
  train::TrainConfig big = tiny_config(ds);
  big.batch = 1000;
  CHECK_THROWS_AS(train::train(ds, big, 1), ValueError);
}

TEST_CASE("config JSON round trips") {
  const data::Dataset ds = toy_dataset();
  train::TrainConfig cfg = tiny_config(ds);
  cfg.wasserstein = true;
  cfg.privacy.enabled = true;
  cfg.privacy.noise_multiplier = 2.5;
  const train::TrainConfig back =
      train::train_config_from_json(train::train_config_to_json(cfg));
  CHECK(train::train_config_to_json(back) == train::train_config_to_json(cfg));
  CHECK(back.net.heads.size() == cfg.net.heads.size());
  CHECK(back.privacy.noise_multiplier == 2.5);
}
