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
#include "tripsynth/data.hpp"
#include "tripsynth/error.hpp"

namespace tripsynth::data {
namespace {

constexpr char kMagic[4] = {'D', 'P', 'D', 'S'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

Dataset Dataset::encode_all(const std::vector<RawRecord>& records,
                            const Codec& codec, std::string provenance) {
  Dataset d;
  d.codec = codec;
  d.provenance = std::move(provenance);
  d.agents.reserve(records.size());
  for (const RawRecord& r : records) d.agents.push_back(codec.encode(r));
  return d;
}

std::vector<RawRecord> Dataset::decode_all() const {
  std::vector<RawRecord> out;
  out.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    RawRecord r = codec.decode(agents[i]);
    r.id = "agent_" + std::to_string(i);
    out.push_back(std::move(r));
  }
  return out;
}

void Dataset::save(const std::filesystem::path& path) const {
  std::vector<io::Section> sections;

  {
    io::Section s;
    s.name = "codec";
    io::ByteWriter w;
    w.str(codec.to_json().dump());
    s.payload = w.take();
    sections.push_back(std::move(s));
  }
  {
    io::Section s;
    s.name = "provenance";
    io::ByteWriter w;
    w.str(provenance);
    s.payload = w.take();
    sections.push_back(std::move(s));
  }
  {
    io::Section s;
    s.name = "agents";
    io::ByteWriter w;
    w.u64(agents.size());
    for (const EncodedAgent& a : agents) {
      w.tensor(a.tab);
      w.tensor(a.seq);
      w.u64(a.seq_len);
    }
    s.payload = w.take();
    sections.push_back(std::move(s));
  }

  io::write_container(path, kMagic, kVersion, sections);
}

Dataset Dataset::load(const std::filesystem::path& path) {
  const io::Container c = io::read_container(path, kMagic, kVersion);
  Dataset d;

  {
    const io::Section& s = c.find("codec");
    io::ByteReader r(s.payload.data(), s.payload.size());
    const std::string text = r.str();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw IntegrityError(std::string("codec section is not valid json: ") +
                               e.what(),
                           0);
    }
    d.codec = Codec::from_json(j);
  }
  {
    const io::Section& s = c.find("provenance");
    io::ByteReader r(s.payload.data(), s.payload.size());
    d.provenance = r.str();
  }
  {
    const io::Section& s = c.find("agents");
    io::ByteReader r(s.payload.data(), s.payload.size());
    const std::uint64_t n = r.u64();
    d.agents.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      EncodedAgent a;
      a.tab = r.tensor();
      a.seq = r.tensor();
      a.seq_len = static_cast<std::size_t>(r.u64());
      d.agents.push_back(std::move(a));
    }
    if (!r.done()) {
      throw IntegrityError("trailing bytes in agents section", r.offset());
    }
  }
  return d;
}

}  // namespace tripsynth::data
