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

// Command-line front end. Stages hand off through files: fixture writes a
// survey, train consumes it and writes a checkpoint plus encoded splits,
// sample/evaluate/attack consume those. Every run writes one run manifest
// next to its outputs; timestamps appear only there, so reruns with the
// same flags produce byte-identical data files.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tripsynth/attack.hpp"
#include "tripsynth/data.hpp"
#include "tripsynth/error.hpp"
#include "tripsynth/eval.hpp"
#include "tripsynth/fixture.hpp"
#include "tripsynth/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace tripsynth;

constexpr char kToolVersion[] = "0.1.0";

std::string iso_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw IoError("short write to " + path.string());
}

// Collects run metadata and writes run_manifest.json last, so the finish
// timestamp covers the whole run.
struct Manifest {
  std::string subcommand;
  std::uint64_t seed = 0;
  ordered_json config = ordered_json::object();
  ordered_json inputs = ordered_json::object();
  ordered_json outputs = ordered_json::object();
  std::string started = iso_now();

  void write(const fs::path& dir) const {
    ordered_json j;
    j["tool"] = "tripsynth";
    j["version"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["started"] = started;
    j["finished"] = iso_now();
    write_text(dir / "run_manifest.json", j.dump(2) + "\n");
  }
};

data::SurveySchema load_schema(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open schema " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("schema " + path.string() + " is not valid JSON: " +
                  e.what());
  }
  return data::schema_from_json(j);
}

bool histogrammable(const data::VariableSpec& v) {
  return v.is_label_kind() || v.bin_edges.size() >= 2;
}

// True when eval can resolve the name against this schema (a schema column
// or one of the derived person variables).
bool resolvable(const data::SurveySchema& s, const std::string& name) {
  if (const data::VariableSpec* v = s.find(name)) {
    return v->role == data::VarRole::kPerson && histogrammable(*v);
  }
  if (name == "AgeGroup") {
    const data::VariableSpec* v = s.find("P_AGE");
    return v != nullptr && !v->is_label_kind() && v->bin_edges.size() >= 2;
  }
  if (name == "Gender") {
    const data::VariableSpec* v = s.find("P_SEXE");
    return v != nullptr && v->is_label_kind();
  }
  if (name == "Employed" || name == "Educated") {
    const data::VariableSpec* v = s.find("P_STATUT");
    return v != nullptr && v->is_label_kind();
  }
  return false;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// ---------------------------------------------------------------------------
// fixture

struct FixtureArgs {
  std::uint64_t seed = 7;
  std::size_t count = 10000;
  bool toy = false;
  std::string out;
};

int cmd_fixture(const FixtureArgs& a) {
  const fs::path out(a.out);
  fs::create_directories(out);
  Manifest m;
  m.subcommand = "fixture";
  m.seed = a.seed;
  m.config = {{"seed", a.seed}, {"count", a.count}, {"toy", a.toy}};

  const data::SurveySchema schema =
      a.toy ? data::toy_schema() : data::standard_schema();
  const std::vector<data::RawRecord> records =
      a.toy ? data::toy_fixture(a.seed, a.count)
            : data::synth_fixture(a.seed, a.count);
  const ordered_json truth = a.toy ? data::toy_truth() : data::fixture_truth();

  data::write_diary_csv(out / "diary.csv", schema, records);
  write_text(out / "truth.json", truth.dump(2) + "\n");
  write_text(out / "schema.json", data::schema_to_json(schema).dump(2) + "\n");

  m.outputs = {{"diary", (out / "diary.csv").string()},
               {"truth", (out / "truth.json").string()},
               {"schema", (out / "schema.json").string()}};
  m.write(out);
  std::cout << "fixture: " << records.size() << " persons -> " << out.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data;
  std::string schema;
  double noise_multiplier = 0.0;
  double clip = 1.0;
  std::string loss = "standard";
  std::size_t epochs = 200;
  std::size_t batch = 64;
  std::size_t disc_steps = 1;
  double lr_d = 5e-4;
  double lr_g = 5e-4;
  double weight_clip = 0.01;
  double val_fraction = 0.0;
  std::size_t max_seq = 20;
  std::size_t steps = 0;  // 0 = run the full epoch budget
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string preset = "paper";
  std::string out;
};

nets::NetConfig preset_net(const std::string& name) {
  nets::NetConfig n;  // defaults are the full-size model
  if (name == "paper") return n;
  if (name == "small") {
    n.latent_dim = 32;
    n.trunk_width = 64;
    n.g2_stack = {64};
    n.d_tab_stack = {64};
    n.d_bilstm = 32;
    n.d_lstm = 16;
    return n;
  }
  // tiny
  n.latent_dim = 8;
  n.trunk_width = 16;
  n.g2_stack = {16};
  n.d_tab_stack = {16};
  n.d_bilstm = 8;
  n.d_lstm = 8;
  return n;
}

int cmd_train(const TrainArgs& a) {
  const fs::path out(a.out);
  fs::create_directories(out);
  const fs::path data_path(a.data);
  const fs::path schema_path =
      a.schema.empty() ? data_path.parent_path() / "schema.json"
                       : fs::path(a.schema);

  Manifest m;
  m.subcommand = "train";
  m.seed = a.seed;
  m.inputs = {{"data", data_path.string()}, {"schema", schema_path.string()}};

  const data::SurveySchema schema = load_schema(schema_path);
  std::vector<data::RawRecord> records =
      data::read_diary_csv(data_path, schema);
  records = data::filter_home_based(records, schema);
  if (records.empty()) {
    throw ValueError("no home-based records survive preprocessing");
  }

  std::vector<data::RawRecord> train_records;
  std::vector<data::RawRecord> val_records;
  if (a.val_fraction > 0.0) {
    auto parts = data::split(records, 1.0 - a.val_fraction, a.seed);
    train_records = std::move(parts.first);
    val_records = std::move(parts.second);
  } else {
    train_records = std::move(records);
  }

  const data::Codec codec =
      data::Codec::fit(train_records, schema, a.max_seq);

  train::TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch = a.batch;
  cfg.disc_steps = a.disc_steps;
  cfg.wasserstein = a.loss == "wasserstein";
  cfg.weight_clip = a.weight_clip;
  cfg.lr_d = a.lr_d;
  cfg.lr_g = a.lr_g;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.privacy.enabled = true;
  cfg.privacy.noise_multiplier = a.noise_multiplier;
  cfg.privacy.clip_norm = a.clip;
  cfg.net = preset_net(a.preset);
  cfg.net.heads = codec.head_specs();
  cfg.net.seq_len = codec.max_seq();
  m.config = train::train_config_to_json(cfg);
  m.config["preset"] = a.preset;
  m.config["val_fraction"] = a.val_fraction;
  m.config["max_seq"] = a.max_seq;
  m.config["steps"] = a.steps;

  const std::string tag = "tripsynth train seed=" + std::to_string(a.seed) +
                          " data=" + data_path.filename().string();
  data::Dataset train_ds =
      data::Dataset::encode_all(train_records, codec, tag + " split=train");
  train_ds.save(out / "train.ds");
  m.outputs["train_dataset"] = (out / "train.ds").string();
  if (!val_records.empty()) {
    data::Dataset val_ds =
        data::Dataset::encode_all(val_records, codec, tag + " split=validation");
    val_ds.save(out / "val.ds");
    m.outputs["validation_dataset"] = (out / "val.ds").string();
  }

  train::TrainResult result = train::train(train_ds, cfg, a.steps);
  train::save_checkpoint(out / "checkpoint.bin", result.state);
  result.history.save_csv(out / "history.csv");
  m.outputs["checkpoint"] = (out / "checkpoint.bin").string();
  m.outputs["history"] = (out / "history.csv").string();
  m.write(out);

  const auto& hist = result.history.steps;
  std::cout << "train: " << hist.size() << " steps";
  if (!hist.empty()) {
    std::cout << ", final d_loss " << hist.back().d_loss << ", g_loss "
              << hist.back().g_loss;
  }
  std::cout << " -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
  std::string checkpoint;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_sample(const SampleArgs& a) {
  const fs::path out(a.out);
  fs::create_directories(out);
  Manifest m;
  m.subcommand = "sample";
  m.seed = a.seed;
  m.config = {{"count", a.count}, {"seed", a.seed}};
  m.inputs = {{"checkpoint", a.checkpoint}};

  const train::Checkpoint c = train::load_checkpoint(a.checkpoint);
  const std::vector<data::RawRecord> agents =
      train::sample_agents(c, a.count, a.seed);
  data::write_diary_csv(out / "synthetic.csv", c.codec.schema(), agents);

  m.outputs = {{"synthetic", (out / "synthetic.csv").string()}};
  m.write(out);
  std::cout << "sample: " << agents.size() << " agents -> " << out.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string real;
  std::string synthetic;
  std::string schema;
  std::string metrics = "marginals,conditionals,joint,pca,tours";
  std::string joint_vars;
  std::size_t pca_components = 2;
  std::string out;
};

void append_summary(std::string& summary, const std::string& metric,
                    const std::string& name, const eval::SrmseReport& r) {
  summary += metric + ',' + name + ',' + data::format_double(r.srmse) + ',' +
             data::format_double(r.pearson) + ',' +
             data::format_double(r.r_squared) + ',' + std::to_string(r.bins) +
             '\n';
}

int cmd_evaluate(const EvaluateArgs& a) {
  const fs::path out(a.out);
  fs::create_directories(out);
  const fs::path real_path(a.real);
  const fs::path schema_path = a.schema.empty()
                                   ? real_path.parent_path() / "schema.json"
                                   : fs::path(a.schema);

  Manifest m;
  m.subcommand = "evaluate";
  m.inputs = {{"real", a.real},
              {"synthetic", a.synthetic},
              {"schema", schema_path.string()}};
  m.config = {{"metrics", a.metrics},
              {"joint_vars", a.joint_vars},
              {"pca_components", a.pca_components}};

  const std::set<std::string> known = {"marginals", "conditionals", "joint",
                                       "pca", "tours"};
  std::set<std::string> wanted;
  for (const std::string& s : split_list(a.metrics)) {
    if (known.count(s) == 0) {
      throw ValueError("unknown metric " + s +
                       " (expected marginals, conditionals, joint, pca, "
                       "tours)");
    }
    wanted.insert(s);
  }
  if (wanted.empty()) throw ValueError("empty metric list");

  const data::SurveySchema schema = load_schema(schema_path);
  const std::vector<data::RawRecord> real =
      data::read_diary_csv(real_path, schema);
  const std::vector<data::RawRecord> synth =
      data::read_diary_csv(a.synthetic, schema);

  std::string summary = "metric,name,srmse,pearson,r_squared,bins\n";

  if (wanted.count("marginals") != 0) {
    for (const data::VariableSpec& v : schema.vars) {
      if (!histogrammable(v)) continue;
      const eval::Histogram ref = eval::marginal(real, schema, v.name);
      const eval::Histogram est = eval::marginal(synth, schema, v.name);
      const eval::SrmseReport r = eval::srmse(est, ref);
      eval::write_comparison_csv(out / ("marginal_" + v.name + ".csv"), ref,
                                 est);
      append_summary(summary, "marginal", v.name, r);
    }
  }

  if (wanted.count("conditionals") != 0) {
    const std::pair<std::string, std::string> pairs[] = {
        {"PERMIT", "Gender"},
        {"AgeGroup", "Gender"},
        {"AgeGroup", "Employed"},
        {"Employed", "Gender"}};
    for (const auto& [va, vb] : pairs) {
      if (!resolvable(schema, va) || !resolvable(schema, vb)) continue;
      const eval::Histogram ref = eval::conditional(real, schema, va, vb);
      const eval::Histogram est = eval::conditional(synth, schema, va, vb);
      const eval::SrmseReport r = eval::srmse(est, ref);
      eval::write_comparison_csv(
          out / ("conditional_" + va + "_given_" + vb + ".csv"), ref, est);
      append_summary(summary, "conditional", va + "|" + vb, r);
    }
  }

  if (wanted.count("joint") != 0) {
    std::vector<std::string> vars = split_list(a.joint_vars);
    if (vars.empty()) {
      for (const data::VariableSpec* v : schema.person_vars()) {
        if (histogrammable(*v)) vars.push_back(v->name);
      }
    }
    if (vars.empty()) throw ValueError("no variables available for joint");
    const eval::Histogram ref = eval::joint(real, schema, vars);
    const eval::Histogram est = eval::joint(synth, schema, vars);
    const eval::SrmseReport r = eval::srmse(est, ref);
    eval::write_comparison_csv(out / "joint.csv", ref, est);
    std::string name = vars[0];
    for (std::size_t i = 1; i < vars.size(); ++i) name += "+" + vars[i];
    append_summary(summary, "joint", name, r);
  }

  if (wanted.count("tours") != 0) {
    const eval::TourLengthReport ref = eval::tour_lengths(real);
    const eval::TourLengthReport est = eval::tour_lengths(synth);
    const eval::SrmseReport r = eval::srmse(est.histogram, ref.histogram);
    eval::write_comparison_csv(out / "tours.csv", ref.histogram,
                               est.histogram);
    append_summary(summary, "tours", "tour_km", r);
  }

  if (wanted.count("pca") != 0) {
    const data::Codec codec = data::Codec::fit(real, schema);
    const data::Dataset real_ds =
        data::Dataset::encode_all(real, codec, "evaluate real");
    const data::Dataset synth_ds =
        data::Dataset::encode_all(synth, codec, "evaluate synthetic");
    const fs::path real_dir = out / "pca" / "real";
    const fs::path synth_dir = out / "pca" / "synthetic";
    fs::create_directories(real_dir);
    fs::create_directories(synth_dir);
    eval::write_pca_csv(real_dir,
                        eval::pca(real_ds.agents, codec, a.pca_components));
    eval::write_pca_csv(synth_dir,
                        eval::pca(synth_ds.agents, codec, a.pca_components));
  }

  write_text(out / "summary.csv", summary);
  m.outputs["summary"] = (out / "summary.csv").string();
  m.write(out);
  std::cout << "evaluate: " << real.size() << " real vs " << synth.size()
            << " synthetic -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// attack

struct AttackArgs {
  std::string checkpoint;
  std::string train_set;
  std::string validation_set;
  std::string out;
};

int cmd_attack(const AttackArgs& a) {
  const fs::path out(a.out);
  fs::create_directories(out);
  Manifest m;
  m.subcommand = "attack";
  m.inputs = {{"checkpoint", a.checkpoint},
              {"train", a.train_set},
              {"validation", a.validation_set}};

  const train::Checkpoint c = train::load_checkpoint(a.checkpoint);
  const data::Dataset train_ds = data::Dataset::load(a.train_set);
  const data::Dataset val_ds = data::Dataset::load(a.validation_set);
  const std::string want = c.codec.to_json().dump();
  if (train_ds.codec.to_json().dump() != want ||
      val_ds.codec.to_json().dump() != want) {
    throw ShapeError(
        "attack datasets are not encoded with the checkpoint's codec");
  }

  const attack::AttackReport report =
      attack::mia_scores(c, train_ds.agents, val_ds.agents);
  write_text(out / "attack_report.json",
             attack::report_json(report).dump(2) + "\n");
  attack::write_histogram_csv(out / "attack_histogram.csv", report);

  m.config = {{"train_agents", train_ds.agents.size()},
              {"validation_agents", val_ds.agents.size()}};
  m.outputs = {{"report", (out / "attack_report.json").string()},
               {"histogram", (out / "attack_histogram.csv").string()}};
  m.write(out);
  std::cout << "attack: auc " << report.auc << " -> " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tripsynth: differentially private travel-diary synthesis"};
  app.require_subcommand(1);
  // One config file for the whole tool; subcommand options live in
  // [subcommand] sections. Explicit command-line flags always win.
  app.set_config("--config", "",
                 "INI config file with [subcommand] sections");

  FixtureArgs fx;
  CLI::App* fixture = app.add_subcommand(
      "fixture", "Generate the deterministic survey fixture");
  fixture->fallthrough();
  fixture->add_option("--seed", fx.seed, "RNG seed")->capture_default_str();
  fixture->add_option("--count", fx.count, "Number of persons")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fixture->add_flag("--toy", fx.toy, "Emit the small toy survey instead");
  fixture->add_option("--out", fx.out, "Output directory")->required();

  TrainArgs tr;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train the composite model with DP-SGD");
  train_cmd->fallthrough();
  train_cmd->add_option("--data", tr.data, "Diary CSV")->required();
  train_cmd->add_option("--schema", tr.schema,
                        "Schema JSON (default: schema.json next to --data)");
  train_cmd
      ->add_option("--noise-multiplier", tr.noise_multiplier,
                   "Gaussian noise multiplier sigma")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_cmd->add_option("--clip", tr.clip, "Per-example clip norm C")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--loss", tr.loss, "Loss variant")
      ->check(CLI::IsMember({"standard", "wasserstein"}))
      ->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs, "Training epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--batch", tr.batch, "Batch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd
      ->add_option("--disc-steps", tr.disc_steps,
                   "Discriminator updates per generator update")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lr-d", tr.lr_d, "Discriminator learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lr-g", tr.lr_g, "Generator learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd
      ->add_option("--weight-clip", tr.weight_clip,
                   "Per-weight clamp (wasserstein only)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd
      ->add_option("--val-fraction", tr.val_fraction,
                   "Held-out fraction written to val.ds")
      ->check(CLI::Range(0.0, 0.9))
      ->capture_default_str();
  train_cmd->add_option("--max-seq", tr.max_seq, "Padded sequence length")
      ->check(CLI::Range(std::size_t{4}, std::size_t{64}))
      ->capture_default_str();
  train_cmd
      ->add_option("--steps", tr.steps,
                   "Stop after this many steps (0 = full epoch budget)")
      ->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "RNG seed")->capture_default_str();
  train_cmd->add_option("--threads", tr.threads, "Worker thread count")
      ->envname("TRIPSYNTH_THREADS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--preset", tr.preset, "Network size preset")
      ->check(CLI::IsMember({"paper", "small", "tiny"}))
      ->capture_default_str();
  train_cmd->add_option("--out", tr.out, "Output directory")->required();

  SampleArgs sm;
  CLI::App* sample =
      app.add_subcommand("sample", "Sample synthetic agents from a checkpoint");
  sample->fallthrough();
  sample->add_option("--checkpoint", sm.checkpoint, "Checkpoint file")
      ->required();
  sample->add_option("--count", sm.count, "Number of agents")
      ->required()
      ->check(CLI::PositiveNumber);
  sample->add_option("--seed", sm.seed, "Sampling seed")->capture_default_str();
  sample->add_option("--out", sm.out, "Output directory")->required();

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Compare a synthetic diary against a reference diary");
  evaluate->fallthrough();
  evaluate->add_option("--real", ev.real, "Reference diary CSV")->required();
  evaluate->add_option("--synthetic", ev.synthetic, "Synthetic diary CSV")
      ->required();
  evaluate->add_option("--schema", ev.schema,
                       "Schema JSON (default: schema.json next to --real)");
  evaluate->add_option("--metrics", ev.metrics, "Comma-separated metric set")
      ->capture_default_str();
  evaluate->add_option("--joint-vars", ev.joint_vars,
                       "Joint variables (default: all person variables)");
  evaluate
      ->add_option("--pca-components", ev.pca_components,
                   "Principal components to keep")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evaluate->add_option("--out", ev.out, "Output directory")->required();

  AttackArgs at;
  CLI::App* attack_cmd = app.add_subcommand(
      "attack", "Membership inference against a trained discriminator");
  attack_cmd->fallthrough();
  attack_cmd->add_option("--checkpoint", at.checkpoint, "Checkpoint file")
      ->required();
  attack_cmd->add_option("--train", at.train_set, "Training split (.ds)")
      ->required();
  attack_cmd
      ->add_option("--validation", at.validation_set, "Held-out split (.ds)")
      ->required();
  attack_cmd->add_option("--out", at.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fixture->parsed()) return cmd_fixture(fx);
    if (train_cmd->parsed()) return cmd_train(tr);
    if (sample->parsed()) return cmd_sample(sm);
    if (evaluate->parsed()) return cmd_evaluate(ev);
    if (attack_cmd->parsed()) return cmd_attack(at);
  } catch (const ValueError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    // ShapeError, TapeError, IoError and its integrity/version children.
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
