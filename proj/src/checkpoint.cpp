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

#include <string>

#include "tripsynth/container.hpp"
#include "tripsynth/error.hpp"
#include "tripsynth/trainer.hpp"

namespace tripsynth::train {
namespace {

constexpr char kMagic[4] = {'D', 'P', 'C', 'T'};
constexpr std::uint16_t kVersion = 1;

io::Section tensor_section(const std::string& name,
                           const std::vector<const Tensor*>& ts) {
  io::Section s;
  s.name = name;
  io::ByteWriter w;
  w.u32(static_cast<std::uint32_t>(ts.size()));
  for (const Tensor* t : ts) w.tensor(*t);
  s.payload = w.take();
  return s;
}

// Reads into an existing parameter structure so shapes are validated
// against what the config implies.
void read_tensors(const io::Section& s, const std::vector<Tensor*>& ts) {
  io::ByteReader r(s.payload.data(), s.payload.size());
  const std::uint32_t n = r.u32();
  if (n != ts.size()) {
    throw IntegrityError("section " + s.name + " holds " + std::to_string(n) +
                             " tensors, expected " + std::to_string(ts.size()),
                         0);
  }
  for (Tensor* t : ts) {
    Tensor got = r.tensor();
    if (got.shape != t->shape) {
      throw IntegrityError("section " + s.name + " tensor shape " +
                               got.shape_str() + " does not match " +
                               t->shape_str(),
                           0);
    }
    *t = std::move(got);
  }
  if (!r.done()) {
    throw IntegrityError("trailing bytes in section " + s.name, r.offset());
  }
}

io::Section json_section(const std::string& name,
                         const nlohmann::ordered_json& j) {
  io::Section s;
  s.name = name;
  io::ByteWriter w;
  w.str(j.dump());
  s.payload = w.take();
  return s;
}

nlohmann::json parse_json_section(const io::Section& s) {
  io::ByteReader r(s.payload.data(), s.payload.size());
  const std::string text = r.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("section " + s.name + " is not valid json: " +
                             e.what(),
                         0);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ValueError("epochs must be at least 1");
  if (batch < 1) throw ValueError("batch size must be at least 1");
  if (disc_steps < 1) throw ValueError("disc_steps must be at least 1");
  if (!(lr_d > 0.0) || !(lr_g > 0.0)) {
    throw ValueError("learning rates must be positive");
  }
  if (!(rho > 0.0) || !(rho < 1.0)) {
    throw ValueError("rho must lie strictly inside (0,1)");
  }
  if (!(eps > 0.0)) throw ValueError("eps must be positive");
  if (wasserstein && !(weight_clip > 0.0)) {
    throw ValueError("weight_clip must be positive under the wasserstein loss");
  }
  if (threads < 1) throw ValueError("threads must be at least 1");
  privacy.validate();
  net.validate();
}

nlohmann::ordered_json net_config_to_json(const nets::NetConfig& n) {
  nlohmann::ordered_json j;
  j["latent_dim"] = n.latent_dim;
  j["trunk_width"] = n.trunk_width;
  j["g2_stack"] = n.g2_stack;
  j["g2_out"] = n.g2_out;
  j["d_tab_stack"] = n.d_tab_stack;
  j["d_bilstm"] = n.d_bilstm;
  j["d_lstm"] = n.d_lstm;
  j["seq_len"] = n.seq_len;
  nlohmann::ordered_json heads = nlohmann::ordered_json::array();
  for (const nets::HeadSpec& h : n.heads) {
    nlohmann::ordered_json hj;
    hj["name"] = h.name;
    hj["categorical"] = h.categorical;
    hj["width"] = h.width;
    heads.push_back(hj);
  }
  j["heads"] = heads;
  return j;
}

nets::NetConfig net_config_from_json(const nlohmann::json& j) {
  try {
    nets::NetConfig n;
    n.latent_dim = j.at("latent_dim").get<std::size_t>();
    n.trunk_width = j.at("trunk_width").get<std::size_t>();
    n.g2_stack = j.at("g2_stack").get<std::vector<std::size_t>>();
    n.g2_out = j.at("g2_out").get<std::size_t>();
    n.d_tab_stack = j.at("d_tab_stack").get<std::vector<std::size_t>>();
    n.d_bilstm = j.at("d_bilstm").get<std::size_t>();
    n.d_lstm = j.at("d_lstm").get<std::size_t>();
    n.seq_len = j.at("seq_len").get<std::size_t>();
    for (const auto& hj : j.at("heads")) {
      nets::HeadSpec h;
      h.name = hj.at("name").get<std::string>();
      h.categorical = hj.at("categorical").get<bool>();
      h.width = hj.at("width").get<std::size_t>();
      n.heads.push_back(std::move(h));
    }
    n.validate();
    return n;
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("malformed net config json: ") + e.what());
  }
}

nlohmann::ordered_json train_config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["epochs"] = c.epochs;
  j["batch"] = c.batch;
  j["disc_steps"] = c.disc_steps;
  j["loss"] = c.wasserstein ? "wasserstein" : "standard";
  j["weight_clip"] = c.weight_clip;
  j["lr_d"] = c.lr_d;
  j["lr_g"] = c.lr_g;
  j["rho"] = c.rho;
  j["eps"] = c.eps;
  nlohmann::ordered_json p;
  p["enabled"] = c.privacy.enabled;
  p["noise_multiplier"] = c.privacy.noise_multiplier;
  p["clip_norm"] = c.privacy.clip_norm;
  j["privacy"] = p;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["net"] = net_config_to_json(c.net);
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  try {
    TrainConfig c;
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch = j.at("batch").get<std::size_t>();
    c.disc_steps = j.at("disc_steps").get<std::size_t>();
    const std::string loss = j.at("loss").get<std::string>();
    if (loss == "standard") {
      c.wasserstein = false;
    } else if (loss == "wasserstein") {
      c.wasserstein = true;
    } else {
      throw ValueError("unknown loss variant " + loss);
    }
    c.weight_clip = j.at("weight_clip").get<double>();
    c.lr_d = j.at("lr_d").get<double>();
    c.lr_g = j.at("lr_g").get<double>();
    c.rho = j.at("rho").get<double>();
    c.eps = j.at("eps").get<double>();
    const auto& p = j.at("privacy");
    c.privacy.enabled = p.at("enabled").get<bool>();
    c.privacy.noise_multiplier = p.at("noise_multiplier").get<double>();
    c.privacy.clip_norm = p.at("clip_norm").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.threads = j.at("threads").get<std::size_t>();
    c.net = net_config_from_json(j.at("net"));
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("malformed train config json: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  std::vector<io::Section> sections;
  sections.push_back(json_section("traincfg", train_config_to_json(c.cfg)));
  sections.push_back(json_section("codec", c.codec.to_json()));
  {
    io::Section s;
    s.name = "meta";
    io::ByteWriter w;
    w.u64(c.step);
    w.u64(c.cfg.seed);  // root of every derived stream
    s.payload = w.take();
    sections.push_back(std::move(s));
  }
  sections.push_back(tensor_section("gen", c.gen.tensors()));
  sections.push_back(tensor_section("disc", c.disc.tensors()));
  {
    io::Section s;
    s.name = "optg";
    io::ByteWriter w;
    w.f64(c.opt_g.lr);
    w.f64(c.opt_g.rho);
    w.f64(c.opt_g.eps);
    w.u32(static_cast<std::uint32_t>(c.opt_g.v.size()));
    for (const Tensor& t : c.opt_g.v) w.tensor(t);
    s.payload = w.take();
    sections.push_back(std::move(s));
  }
  io::write_container(path, kMagic, kVersion, sections);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const io::Container file = io::read_container(path, kMagic, kVersion);

  Checkpoint c;
  c.cfg = train_config_from_json(parse_json_section(file.find("traincfg")));
  c.codec = data::Codec::from_json(parse_json_section(file.find("codec")));
  {
    const io::Section& s = file.find("meta");
    io::ByteReader r(s.payload.data(), s.payload.size());
    c.step = static_cast<std::size_t>(r.u64());
    const std::uint64_t seed = r.u64();
    if (seed != c.cfg.seed) {
      throw IntegrityError("meta seed disagrees with the train config", 0);
    }
  }
  c.gen = nets::build_generator(c.cfg.net);
  c.disc = nets::build_discriminator(c.cfg.net);
  read_tensors(file.find("gen"), c.gen.tensors());
  read_tensors(file.find("disc"), c.disc.tensors());
  {
    const io::Section& s = file.find("optg");
    io::ByteReader r(s.payload.data(), s.payload.size());
    c.opt_g.lr = r.f64();
    c.opt_g.rho = r.f64();
    c.opt_g.eps = r.f64();
    const std::uint32_t n = r.u32();
    const auto gen_tensors = c.gen.tensors();
    if (n != gen_tensors.size()) {
      throw IntegrityError("optimizer state count does not match generator",
                           0);
    }
    c.opt_g.v.clear();
    for (std::uint32_t i = 0; i < n; ++i) c.opt_g.v.push_back(r.tensor());
    if (!r.done()) {
      throw IntegrityError("trailing bytes in section optg", r.offset());
    }
  }
  return c;
}

}  // namespace tripsynth::train
